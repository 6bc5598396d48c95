//! `polyroth` command line tool.
//!
//! Exit codes: 0 success, 2 bad input or unmet precondition, 3 unresolved
//! quadrature, 4 a checked property failed, 1 anything else.

mod io;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use io::{fmt_dyadic, load_grid, load_pair, load_poly, load_set, phase_poly, CmdResult, Failure, PairRef, Sink};
use polyroth::mollify::{bourgain_lower_bound, AverageMode};
use polyroth::oscillatory::{
    claim45_check, hbound_check, hormander_decay_probe, main_term, mixed_derivative_probe, oscillatory_integral,
    stationary_compare, PsiPhase, Rect,
};
use polyroth::patterns::{adversarial_sets, find_pattern, max_gap, PatternSearch, SetKind};
use polyroth::scale::{build_admissible, classify_scales, default_window, LinearCase};
use polyroth::trilinear::{bilinear_decay_probe, decompose_i, trilinear_form};
use polyroth::poly::Evaluate;
use polyroth::{Bump, Error, ScaleParams};
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "polyroth", version, about = "Polynomial Roth pattern toolkit on the real line")]
#[command(after_help = "Set POLYROTH_THREADS to cap the number of worker threads.\n\
Exit codes: 0 ok, 2 precondition, 3 unresolved quadrature, 4 check failure.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file, written atomically. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Phase {
    /// Pair reference `pairs.json#k` from `admissible`; the phase is its normalized Q.
    #[arg(long)]
    pair: Option<PairRef>,
    /// Phase polynomial coefficients, constant term first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dyadic,
    Smooth,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseKind {
    /// The model phase `x y`.
    Xy,
    /// The dual phase of Q.
    Psi,
}

#[derive(Subcommand)]
enum Command {
    /// Classify dyadic scales. CSV columns: k, dominating_r, in_J1r, good.
    Scales {
        #[arg(long)]
        poly: PathBuf,
        /// Exponent g0 of Gamma0 = 2^g0.
        #[arg(long, default_value_t = 10)]
        gamma0: i64,
        /// Scale window lo:hi. Defaults to a window holding every bad scale.
        #[arg(long, value_parser = io::parse_int_range, allow_hyphen_values = true)]
        window: Option<(i64, i64)>,
        #[command(flatten)]
        out: Output,
    },
    /// Build interlaced admissible sets and their pairs (JSON).
    Admissible {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        gamma0: i64,
        #[arg(long, default_value_t = 30)]
        theta: i64,
        #[command(flatten)]
        out: Output,
    },
    /// Both sides of the martingale lower bound (JSON). Fails with 4 if it does not hold.
    Martingale {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        ell: u32,
        #[arg(long, value_enum, default_value_t = Mode::Dyadic)]
        mode: Mode,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate the trilinear form (JSON). Exit 3 if the Richardson check fails.
    Trilinear {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 0)]
        j: i64,
        #[arg(long, default_value_t = 14)]
        n: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Split the localized form with mollifiers at levels l',l,l'' (JSON).
    Decompose {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 0)]
        j: i64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        levels: Vec<i32>,
        #[arg(long, default_value_t = 12)]
        n: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Bilinear decay probe. CSV columns: m, log2_norm_max, trials.
    /// Exit 4 unless the fitted decay is positive with residual below 0.25.
    Decay {
        #[arg(long)]
        pair: PairRef,
        /// Frequency exponents lo:hi.
        #[arg(long, value_parser = io::parse_int_range, default_value = "6:12")]
        m: (i64, i64),
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Pattern search in unions of intervals.
    Patterns {
        #[command(subcommand)]
        action: PatternAction,
    },
    /// One oscillatory integral with its stationary phase main term (JSON).
    Oscillate {
        #[command(flatten)]
        phase: Phase,
        #[arg(long, allow_hyphen_values = true)]
        xi: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, value_parser = io::parse_number)]
        lambda: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Quadrature against the main term over a lambda sweep. CSV columns: lambda,
    /// value_re, value_im, main_re, main_im, remainder, normalized_remainder,
    /// ratio, quadrature_error, resolved.
    StationaryCompare {
        #[command(flatten)]
        phase: Phase,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        xi: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, value_parser = io::parse_dyadic_sweep, default_value = "2^8:2^18")]
        lambda: io::Sweep,
        #[command(flatten)]
        out: Output,
    },
    /// Size of the derivatives of H on the unit annuli (JSON). Exit 4 on a violation.
    Hbound {
        #[arg(long)]
        pair: PairRef,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Mixed derivative of the shifted dual phase difference. CSV columns:
    /// alpha, min_abs, c_probe, used, skipped.
    MixedDerivative {
        #[arg(long)]
        pair: PairRef,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.4")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Operator norm decay of an oscillatory kernel. CSV columns: lambda, norm, grid.
    Hormander {
        #[arg(long, value_enum, default_value_t = PhaseKind::Xy)]
        phase: PhaseKind,
        #[command(flatten)]
        q: Phase,
        /// Rectangle x0:x1,y0:y1.
        #[arg(long, value_parser = io::parse_rect, allow_hyphen_values = true, default_value = "1:2,1:2")]
        rect: Rect,
        #[arg(long, value_parser = io::parse_dyadic_sweep, default_value = "2^6:2^14")]
        lambda: io::Sweep,
        #[arg(long, default_value_t = 2)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Degree count and sign scan for the linear-dominant case (JSON).
    /// Exit 4 if the degree or the sign change bound fails.
    Claim45 {
        #[command(flatten)]
        phase: Phase,
        /// Dyadic exponent of the linear coefficient; needed with --q.
        #[arg(long, allow_hyphen_values = true)]
        b1: Option<i64>,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Merge result files into one JSON summary.
    Report {
        files: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum PatternAction {
    /// Search for x, x+t, x+P(t) in S with t >= delta N^(1/d) (JSON).
    Find {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, value_parser = io::parse_number, default_value = "2^20")]
        grid: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Largest gap ratio t / N^(1/d) over patterns in S (JSON).
    Maxgap {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, value_parser = io::parse_number, default_value = "2^20")]
        grid: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Gap ratios over generated sets. CSV columns: kind, epsilon, N, seed,
    /// density, max_gap, verified.
    Sweep {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "random,cantor,shifted-blocks")]
        kind: Vec<SetKind>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = io::parse_number, default_value = "16,256,1024")]
        horizon: Vec<f64>,
        /// Sets per combination.
        #[arg(long, default_value_t = 4)]
        count: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_parser = io::parse_number, default_value = "2^20")]
        grid: f64,
        #[command(flatten)]
        out: Output,
    },
}

/// JSON artifact with the version, kind and invoking arguments up front.
fn artifact(kind: &str, body: Value) -> Value {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut v = json!({"version": io::VERSION, "kind": kind, "config": {"args": args}});
    if let (Some(map), Value::Object(extra)) = (v.as_object_mut(), body) {
        map.extend(extra);
    }
    v
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn grid_steps(grid: f64) -> CmdResult<u64> {
    if grid.fract() != 0.0 || !(1.0..=2f64.powi(40)).contains(&grid) {
        return Err(Failure::Precondition(format!("grid {grid} must be an integer in 1..=2^40")));
    }
    Ok(grid as u64)
}

/// Returns the summary line on success.
fn run(cmd: Command) -> CmdResult<String> {
    match cmd {
        Command::Scales { poly, gamma0, window, out } => {
            let p = load_poly(&poly)?;
            let params = ScaleParams::new(gamma0, 30)?;
            let range = match window {
                Some((lo, hi)) => lo..=hi,
                None => default_window(&p, &params),
            };
            let c = classify_scales(&p, &params, range)?;
            let opt = |r: Option<usize>| r.map(|r| r.to_string()).unwrap_or_default();
            let rows: Vec<Vec<String>> = c
                .records
                .iter()
                .map(|r| vec![r.k.to_string(), opt(r.dominating), opt(r.secondary), (r.good as u8).to_string()])
                .collect();
            Sink::new(out.out).csv("kind=scales", &["k", "dominating_r", "in_J1r", "good"], &rows)?;
            Ok(format!("scales: {} bad of {} in [{}, {}]", c.bad.len(), rows.len(), c.window.0, c.window.1))
        }
        Command::Admissible { poly, count, gamma0, theta, out } => {
            let p = load_poly(&poly)?;
            let params = ScaleParams::new(gamma0, theta)?;
            let sets = build_admissible(&p, &params, count)?;
            let mut body = to_value(&sets);
            body["polynomial"] = p.to_json();
            body["params"] = to_value(&params);
            Sink::new(out.out).json(&artifact("admissible", body))?;
            Ok(format!("admissible: {} pairs, Gamma_d = {}, offset {}", sets.pairs.len(), sets.gamma_d, sets.offset))
        }
        Command::Martingale { f, k, ell, mode, out } => {
            let f = load_grid(&f)?;
            let mode = match mode {
                Mode::Dyadic => AverageMode::Dyadic,
                Mode::Smooth => AverageMode::Smooth,
            };
            let b = bourgain_lower_bound(&f, k, ell, mode)?;
            let mut body = to_value(&b);
            body["holds"] = json!(b.holds());
            Sink::new(out.out).json(&artifact("martingale", body))?;
            let line = format!("martingale: lhs {:e}, rhs {:e}", b.lhs, b.rhs);
            if b.holds() { Ok(line) } else { Err(Failure::Check(format!("{line}: bound fails"))) }
        }
        Command::Trilinear { f, poly, j, n, out } => {
            let (f, p) = (load_grid(&f)?, load_poly(&poly)?);
            let r = trilinear_form(&f, &p, j, n)?;
            Sink::new(out.out).json(&artifact("trilinear", to_value(&r)))?;
            let line = format!("trilinear: I = {:.10}, Richardson gap {:.2e}", r.value, r.richardson_gap);
            if r.unresolved { Err(Failure::Unresolved(format!("{line}: unresolved"))) } else { Ok(line) }
        }
        Command::Decompose { f, poly, j, levels, n, out } => {
            let (f, p) = (load_grid(&f)?, load_poly(&poly)?);
            let [a, b, c] = levels[..] else {
                return Err(Failure::Precondition("--levels needs three values".into()));
            };
            let d = decompose_i(&f, &p, j, (a, b, c), n)?;
            Sink::new(out.out).json(&artifact("decompose", to_value(&d)))?;
            Ok(format!("decompose: I1 {:e}, I2 {:e}, I3 {:e}, residual {:.2e}", d.i1, d.i2, d.i3, d.split_residual))
        }
        Command::Decay { pair, m, trials, seed, out } => {
            let (pair, p) = load_pair(&pair)?;
            let ms: Vec<i64> = (m.0..=m.1).collect();
            let probe = bilinear_decay_probe(&p, &pair, &ms, trials, seed)?;
            let rows: Vec<Vec<String>> = probe
                .rows
                .iter()
                .map(|r| vec![r.m.to_string(), format!("{:e}", r.norm_max.log2()), r.trials.to_string()])
                .collect();
            Sink::new(out.out).csv(&format!("kind=decay seed={seed}"), &["m", "log2_norm_max", "trials"], &rows)?;
            let line = format!("decay: gamma {:.3}, max residual {:.3}", probe.gamma(), probe.fit.max_residual);
            if probe.gamma() > 0.0 && probe.fit.max_residual < 0.25 {
                Ok(line)
            } else {
                Err(Failure::Check(format!("{line}: no positive decay")))
            }
        }
        Command::Patterns { action } => run_patterns(action),
        Command::Oscillate { phase, xi, eta, lambda, out } => {
            let (q, _) = phase_poly(&phase.pair, &phase.q)?;
            let tau = Bump::tau(0);
            let v = oscillatory_integral(&q, xi, eta, lambda, &tau)?;
            let main = main_term(&q, xi, eta, lambda, &tau)?;
            let body = json!({
                "xi": xi, "eta": eta, "lambda": lambda,
                "value_re": v.value.re, "value_im": v.value.im, "error": v.error, "panels": v.panels,
                "main_re": main.re, "main_im": main.im, "remainder": (v.value - main).norm(),
            });
            Sink::new(out.out).json(&artifact("oscillate", body))?;
            Ok(format!("oscillate: |I| = {:e}, error {:.1e}", v.value.norm(), v.error))
        }
        Command::StationaryCompare { phase, xi, eta, lambda, out } => {
            let (q, _) = phase_poly(&phase.pair, &phase.q)?;
            // too few resolved rows to fit means the quadrature floor was hit
            let r = stationary_compare(&q, xi, eta, &lambda.0, &Bump::tau(0)).map_err(|e| match e {
                Error::Fit(m) => Failure::Unresolved(format!("too few resolved lambdas: {m}")),
                e => e.into(),
            })?;
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|c| {
                    let mut row = vec![fmt_dyadic(c.lambda)];
                    row.extend(
                        [c.value_re, c.value_im, c.main_re, c.main_im, c.remainder, c.normalized_remainder, c.ratio, c.quadrature_error]
                            .iter()
                            .map(|x| format!("{x:e}")),
                    );
                    row.push((c.resolved as u8).to_string());
                    row
                })
                .collect();
            let header = [
                "lambda", "value_re", "value_im", "main_re", "main_im", "remainder", "normalized_remainder", "ratio",
                "quadrature_error", "resolved",
            ];
            let tags = format!("kind=stationary slope={:.4} residual={:.4}", r.fit.slope, r.fit.max_residual);
            Sink::new(out.out).csv(&tags, &header, &rows)?;
            Ok(format!(
                "stationary-compare: normalized remainder slope {:.3}, plain remainder slope {:.3}, R_cap {:.3e}",
                r.fit.slope, r.absolute_fit.slope, r.r_cap
            ))
        }
        Command::Hbound { pair, samples, seed, out } => {
            let (pair, p) = load_pair(&pair)?;
            let q = pair.q_polynomial(&p)?;
            let r = hbound_check(&q, pair.d0, samples, seed)?;
            let mut body = to_value(&r);
            body["seed"] = json!(seed);
            Sink::new(out.out).json(&artifact("hbound", body))?;
            let line = format!("hbound: {} samples, min term {:.4} against threshold {:.4}", r.samples, r.min_term, r.threshold);
            if r.passed { Ok(line) } else { Err(Failure::Check(format!("{line}: violated"))) }
        }
        Command::MixedDerivative { pair, alpha, samples, seed, out } => {
            let (pair, p) = load_pair(&pair)?;
            let q = pair.q_polynomial(&p)?;
            let r = mixed_derivative_probe(&q, &pair, &alpha, samples, seed)?;
            let opt = |x: Option<f64>| x.map(|x| format!("{x:e}")).unwrap_or_default();
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|w| vec![format!("{}", w.alpha), opt(w.min_abs), opt(w.c_probe), w.used.to_string(), w.skipped.to_string()])
                .collect();
            let tags = format!("kind=mixed-derivative seed={seed} m0={}", r.m0);
            Sink::new(out.out).csv(&tags, &["alpha", "min_abs", "c_probe", "used", "skipped"], &rows)?;
            let c = r.rows.iter().filter_map(|w| w.c_probe).fold(f64::INFINITY, f64::min);
            Ok(format!("mixed-derivative: smallest c_probe {c:.4e}"))
        }
        Command::Hormander { phase, q, rect, lambda, trials, seed, out } => {
            let r = match phase {
                PhaseKind::Xy => hormander_decay_probe(&|x, y| x * y, rect, &lambda.0, trials, seed)?,
                PhaseKind::Psi => {
                    let (q, _) = phase_poly(&q.pair, &q.q)?;
                    let psi = PsiPhase::new(&q, rect)?;
                    hormander_decay_probe(&|x, y| psi.eval(x, y), rect, &lambda.0, trials, seed)?
                }
            };
            let rows: Vec<Vec<String>> =
                r.rows.iter().map(|w| vec![fmt_dyadic(w.lambda), format!("{:e}", w.norm), w.grid.to_string()]).collect();
            let tags = format!("kind=hormander seed={seed} slope={:.4} residual={:.4}", r.fit.slope, r.fit.max_residual);
            Sink::new(out.out).csv(&tags, &["lambda", "norm", "grid"], &rows)?;
            Ok(format!("hormander: slope {:.3}, max residual {:.3}", r.fit.slope, r.fit.max_residual))
        }
        Command::Claim45 { phase, b1, grid, out } => {
            let (q, pair) = phase_poly(&phase.pair, &phase.q)?;
            let linear = match (pair, b1) {
                (Some(pair), None) => pair
                    .linear
                    .ok_or_else(|| Failure::Precondition("the pair's dominating degree is not 1".into()))?,
                (None, Some(b1)) => LinearCase { d1: q.degree(), b1, q0: 0 },
                (Some(_), Some(_)) => return Err(Failure::Precondition("--b1 only goes with --q".into())),
                (None, None) => return Err(Failure::Precondition("--q needs --b1".into())),
            };
            let r = claim45_check(&q, &linear, grid)?;
            let mut body = to_value(&r);
            body["leading_ratio"] = json!(r.leading_ratio());
            Sink::new(out.out).json(&artifact("claim45", body))?;
            let line = format!(
                "claim45: degree {} (expected {}), {} sign changes, floor {:.3e}",
                r.degree,
                r.expected_degree,
                r.sign_changes.len(),
                r.floor
            );
            if r.degree == r.expected_degree && r.bound_respected {
                Ok(line)
            } else {
                Err(Failure::Check(line))
            }
        }
        Command::Report { files, out } => {
            let summary = report::summarize(&files)?;
            let n = summary["warnings"].as_array().map_or(0, Vec::len);
            Sink::new(out.out).json(&summary)?;
            Ok(format!("report: {} files, {n} warnings", files.len()))
        }
    }
}

fn run_patterns(action: PatternAction) -> CmdResult<String> {
    match action {
        PatternAction::Find { set, poly, delta, grid, out } => {
            let (s, p) = (load_set(&set)?, load_poly(&poly)?);
            let r = find_pattern(&s, &p, delta, grid_steps(grid)?)?;
            let verified = match &r {
                PatternSearch::Found(inst) => Some(inst.verify(&s, &p)),
                PatternSearch::NotFound { .. } => None,
            };
            let mut body = to_value(&r);
            body["verified"] = json!(verified);
            Sink::new(out.out).json(&artifact("patterns-find", body))?;
            match (&r, verified) {
                (PatternSearch::Found(inst), Some(true)) => {
                    Ok(format!("patterns find: x = {}, t = {}, gap ratio {:.4}", inst.x, inst.t, inst.gap_ratio))
                }
                (PatternSearch::Found(_), _) => Err(Failure::Check("pattern failed exact verification".into())),
                (PatternSearch::NotFound { largest_step }, _) => {
                    Ok(format!("patterns find: none with t >= delta scale; largest step {largest_step:?}"))
                }
            }
        }
        PatternAction::Maxgap { set, poly, grid, out } => {
            let (s, p) = (load_set(&set)?, load_poly(&poly)?);
            let g = max_gap(&s, &p, grid_steps(grid)?)?;
            let body = json!({"N": s.horizon(), "density": s.density(), "max_gap": g});
            Sink::new(out.out).json(&artifact("patterns-maxgap", body))?;
            Ok(format!("patterns maxgap: {g:.6} at density {:.4}", s.density()))
        }
        PatternAction::Sweep { poly, kind, eps, horizon, count, seed, grid, out } => {
            let p = load_poly(&poly)?;
            let steps = grid_steps(grid)?;
            let mut rows = Vec::new();
            let mut unsound = 0;
            for &k in &kind {
                for &e in &eps {
                    for &n in &horizon {
                        for i in 0..count {
                            let set_seed = seed.wrapping_mul(1_000_003).wrapping_add(i);
                            let s = adversarial_sets(k, e, n, set_seed, None)?;
                            let g = max_gap(&s, &p, steps)?;
                            let verified = match find_pattern(&s, &p, 0.0, steps)? {
                                PatternSearch::Found(inst) => inst.verify(&s, &p),
                                PatternSearch::NotFound { .. } => s.is_empty(),
                            };
                            unsound += usize::from(!verified);
                            rows.push(vec![
                                to_value(&k).as_str().unwrap_or_default().to_string(),
                                e.to_string(),
                                fmt_dyadic(n),
                                set_seed.to_string(),
                                format!("{:e}", s.density()),
                                format!("{g:e}"),
                                (verified as u8).to_string(),
                            ]);
                        }
                    }
                }
            }
            let header = ["kind", "epsilon", "N", "seed", "density", "max_gap", "verified"];
            Sink::new(out.out).csv(&format!("kind=patterns-sweep seed={seed}"), &header, &rows)?;
            let line = format!("patterns sweep: {} sets, {unsound} unverified", rows.len());
            if unsound == 0 { Ok(line) } else { Err(Failure::Check(line)) }
        }
    }
}

fn configure_threads() -> CmdResult<()> {
    let Ok(raw) = std::env::var("POLYROTH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Precondition(format!("POLYROTH_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Other(format!("cannot size the thread pool: {e}")))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(summary) => eprintln!("{summary}"),
        Err(f) => {
            eprintln!("error: {}", f.message());
            std::process::exit(f.exit_code());
        }
    }
}
