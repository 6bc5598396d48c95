//! Phases `Phi(t) = t xi + eta Q(t)`, the dual phase `Psi`, stationary phase
//! against quadrature, and the decay probes built on them.

use crate::error::{Error, Result};
use crate::fit::DecayFit;
use crate::mollify::Bump;
use crate::poly::{Evaluate, Poly};
use crate::quad::GaussLegendre;
use crate::roots::real_roots_in;
use crate::scalar::Real;
use crate::scale::{AdmissiblePair, LinearCase};
use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Critical points are sought in this open interval.
pub const WINDOW: (f64, f64) = (0.5, 2.0);

/// A zero of `Phi'` inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint<T> {
    pub t: T,
    /// `Phi''(t) = eta Q''(t)`.
    pub second: T,
    /// `Phi''` vanishes here to working precision.
    pub degenerate: bool,
}

fn coefficient_scale<T: Real>(q: &Poly<T>) -> T {
    q.coeffs().iter().fold(T::zero(), |acc, c| acc + c.abs())
}

/// All zeros of `xi + eta Q'(t)` in `(1/2, 2)`.
pub fn critical_points<T: Real>(q: &Poly<T>, xi: T, eta: T) -> Result<Vec<CriticalPoint<T>>> {
    if eta.is_zero() || !eta.is_finite() || !xi.is_finite() {
        return Err(Error::precondition("eta must be finite and nonzero"));
    }
    let dphi = q.derivative().scale(eta).add(&Poly::constant(xi));
    let scale = xi.abs() + eta.abs() * coefficient_scale(q);
    let (lo, hi) = (T::lit(WINDOW.0), T::lit(WINDOW.1));
    let tol = T::lit(1e-9) * eta.abs() * coefficient_scale(q);
    let points = real_roots_in(&dphi, lo, hi)
        .into_iter()
        .filter(|r| r.t > lo && r.t < hi)
        .map(|r| {
            let second = eta * q.eval(r.t, 2);
            debug_assert!(dphi.eval(r.t, 0).abs() <= T::lit(1e-10) * scale + T::epsilon());
            CriticalPoint { t: r.t, second, degenerate: r.tangential || second.abs() <= tol }
        })
        .collect();
    Ok(points)
}

/// `Psi`, its first partial derivatives and the mixed derivative `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPhase<T> {
    pub t_c: T,
    pub psi: T,
    /// `d Psi / d xi = t_c`.
    pub dpsi_dxi: T,
    /// `d Psi / d eta = Q(t_c)`.
    pub dpsi_deta: T,
    /// `H = -Q'(t_c) / (eta Q''(t_c))`.
    pub h: T,
}

fn unique_point<T: Real>(q: &Poly<T>, xi: T, eta: T) -> Result<CriticalPoint<T>> {
    let pts = critical_points(q, xi, eta)?;
    match pts.as_slice() {
        [] => Err(Error::NoStationaryPoint),
        [c] if !c.degenerate => Ok(*c),
        [_] => Err(Error::precondition("the critical point is degenerate")),
        _ => Err(Error::precondition(format!("{} critical points; the dual phase needs one", pts.len()))),
    }
}

fn dual_at<T: Real>(q: &Poly<T>, xi: T, eta: T, t: T) -> DualPhase<T> {
    let qt = q.eval(t, 0);
    DualPhase { t_c: t, psi: t * xi + eta * qt, dpsi_dxi: t, dpsi_deta: qt, h: -q.eval(t, 1) / (eta * q.eval(t, 2)) }
}

/// Closed-form dual phase at the unique nondegenerate critical point.
pub fn dual_phase<T: Real>(q: &Poly<T>, xi: T, eta: T) -> Result<DualPhase<T>> {
    let c = unique_point(q, xi, eta)?;
    Ok(dual_at(q, xi, eta, c.t))
}

/// Closed-form `d H / d xi`, `d H / d eta` and `1 - Q' Q''' / (Q'')^2` at `t_c`.
pub fn h_derivatives(q: &Poly<f64>, t_c: f64, eta: f64) -> (f64, f64, f64) {
    let (q1, q2, q3) = (q.eval(t_c, 1), q.eval(t_c, 2), q.eval(t_c, 3));
    let term = 1.0 - q1 * q3 / (q2 * q2);
    let dxi = term / (eta * eta * q2);
    let deta = q1 / (eta * eta * q2) * (1.0 + term);
    (dxi, deta, term)
}

/// A quadrature value and the size of its last refinement step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryValue {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

const PANEL_BUDGET: usize = 1 << 22;

/// `int e^{i lambda Phi(t)} tau(t) dt` to absolute tolerance `1e-8 / sqrt(lambda)`.
pub fn oscillatory_integral(q: &Poly<f64>, xi: f64, eta: f64, lambda: f64, tau: &Bump) -> Result<OscillatoryValue> {
    oscillatory_integral_tol(q, xi, eta, lambda, tau, 1e-8 / lambda.max(1.0).sqrt())
}

/// As [`oscillatory_integral`] with an explicit absolute tolerance.
///
/// Panels start no wider than `2 pi / (lambda max|Phi'| + 1)` and double
/// until two successive 16-point Gauss-Legendre sums agree.
pub fn oscillatory_integral_tol(
    q: &Poly<f64>,
    xi: f64,
    eta: f64,
    lambda: f64,
    tau: &Bump,
    tol: f64,
) -> Result<OscillatoryValue> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::precondition("lambda must be a finite nonnegative number"));
    }
    let (a, b) = tau.support();
    let phi = |t: f64| t * xi + eta * q.eval(t, 0);
    let max_slope = (0..=1024)
        .map(|i| (xi + eta * q.eval(a + (b - a) * i as f64 / 1024.0, 1)).abs())
        .fold(0.0, f64::max)
        * 1.1;
    let width = 2.0 * PI / (lambda * max_slope + 1.0);
    let mut panels = ((b - a) / width).ceil().max(1.0) as usize;
    let rule = GaussLegendre::<f64>::new(16);
    let sum = |panels: usize| -> Complex64 {
        let h = (b - a) / panels as f64;
        let parts: Vec<Complex64> = (0..panels)
            .into_par_iter()
            .with_min_len(256)
            .map(|p| {
                let mid = a + h * (p as f64 + 0.5);
                let mut s = Complex64::new(0.0, 0.0);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = mid + 0.5 * h * x;
                    let amp = tau.eval(t);
                    if amp != 0.0 {
                        s += Complex64::from_polar(w * amp, lambda * phi(t));
                    }
                }
                s * (0.5 * h)
            })
            .collect();
        let re: Vec<f64> = parts.iter().map(|z| z.re).collect();
        let im: Vec<f64> = parts.iter().map(|z| z.im).collect();
        Complex64::new(crate::scalar::pairwise_sum(&re), crate::scalar::pairwise_sum(&im))
    };
    let mut coarse = sum(panels);
    loop {
        if 2 * panels > PANEL_BUDGET {
            return Err(Error::Unresolved { estimate: coarse.norm(), error: f64::NAN });
        }
        let fine = sum(2 * panels);
        let err = (fine - coarse).norm();
        panels *= 2;
        if err <= tol {
            return Ok(OscillatoryValue { value: fine, error: err, panels });
        }
        coarse = fine;
    }
}

/// `sum_c lambda^{-1/2} sqrt(2 pi) e^{i sgn(Phi'') pi/4} |Phi''|^{-1/2} tau(t_c) e^{i lambda Phi(t_c)}`.
pub fn main_term(q: &Poly<f64>, xi: f64, eta: f64, lambda: f64, tau: &Bump) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for c in critical_points(q, xi, eta)? {
        if c.degenerate {
            return Err(Error::precondition(format!("degenerate critical point at t = {}", c.t)));
        }
        let amp = (2.0 * PI / (lambda * c.second.abs())).sqrt() * tau.eval(c.t);
        let phase = lambda * (c.t * xi + eta * q.eval(c.t, 0)) + c.second.signum() * PI / 4.0;
        total += Complex64::from_polar(amp, phase);
    }
    Ok(total)
}

/// One row of [`stationary_compare`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryComparison {
    pub lambda: f64,
    pub value_re: f64,
    pub value_im: f64,
    pub main_re: f64,
    pub main_im: f64,
    /// `|quadrature - main term|`.
    pub remainder: f64,
    /// `lambda^{1/2} |remainder|`, the remainder inside the stationary
    /// expansion once the leading `lambda^{-1/2}` is factored out.
    pub normalized_remainder: f64,
    /// `lambda |remainder|`.
    pub ratio: f64,
    pub quadrature_error: f64,
    /// The remainder is well above the quadrature error.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub rows: Vec<StationaryComparison>,
    /// `log2(normalized_remainder)` against `log2(lambda)` over resolved rows.
    pub fit: DecayFit,
    /// Same fit on the plain remainder.
    pub absolute_fit: DecayFit,
    /// Largest `lambda |remainder|` seen.
    pub r_cap: f64,
}

/// Quadrature against the main term over a list of `lambda`.
pub fn stationary_compare(q: &Poly<f64>, xi: f64, eta: f64, lambdas: &[f64], tau: &Bump) -> Result<StationaryReport> {
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let main = main_term(q, xi, eta, lambda, tau)?;
            let v = oscillatory_integral(q, xi, eta, lambda, tau)?;
            let remainder = (v.value - main).norm();
            Ok(StationaryComparison {
                lambda,
                value_re: v.value.re,
                value_im: v.value.im,
                main_re: main.re,
                main_im: main.im,
                remainder,
                normalized_remainder: remainder * lambda.sqrt(),
                ratio: remainder * lambda,
                quadrature_error: v.error,
                resolved: remainder > 16.0 * v.error.max(1e-15 * main.norm()) && remainder > 1e-300,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let used: Vec<&StationaryComparison> = rows.iter().filter(|r| r.resolved).collect();
    let xs: Vec<f64> = used.iter().map(|r| r.lambda.log2()).collect();
    let norm: Vec<f64> = used.iter().map(|r| r.normalized_remainder).collect();
    let abs: Vec<f64> = used.iter().map(|r| r.remainder).collect();
    let fit = DecayFit::fit_log2(&xs, &norm, 3)?;
    let absolute_fit = DecayFit::fit_log2(&xs, &abs, 3)?;
    let r_cap = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(StationaryReport { rows, fit, absolute_fit, r_cap })
}

/// Output of [`hbound_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HBoundReport {
    pub samples: usize,
    pub skipped: usize,
    pub min_dxi_h: f64,
    pub max_dxi_h: f64,
    pub min_deta_h: f64,
    pub max_deta_h: f64,
    /// Smallest `1 - Q' Q''' / (Q'')^2` seen.
    pub min_term: f64,
    /// `(99/100) / (d0 - 1)`.
    pub threshold: f64,
    /// Every sampled term exceeds half the threshold.
    pub passed: bool,
}

fn annulus_sample(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.gen_range(1.0..=2.0);
    if rng.gen_bool(0.5) { m } else { -m }
}

/// Samples `(xi, eta)` with `|xi|, |eta|` in `[1, 2]` and checks the size of `H`'s derivatives.
pub fn hbound_check(q: &Poly<f64>, d0: usize, samples: usize, seed: u64) -> Result<HBoundReport> {
    if d0 < 2 {
        return Err(Error::precondition("the H bounds need d0 >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = 0.99 / (d0 - 1) as f64;
    let mut r = HBoundReport {
        samples: 0,
        skipped: 0,
        min_dxi_h: f64::INFINITY,
        max_dxi_h: 0.0,
        min_deta_h: f64::INFINITY,
        max_deta_h: 0.0,
        min_term: f64::INFINITY,
        threshold,
        passed: true,
    };
    for _ in 0..samples {
        let (xi, eta) = (annulus_sample(&mut rng), annulus_sample(&mut rng));
        let Ok(c) = unique_point(q, xi, eta) else {
            r.skipped += 1;
            continue;
        };
        let (dxi, deta, term) = h_derivatives(q, c.t, eta);
        r.samples += 1;
        r.min_dxi_h = r.min_dxi_h.min(dxi.abs());
        r.max_dxi_h = r.max_dxi_h.max(dxi.abs());
        r.min_deta_h = r.min_deta_h.min(deta.abs());
        r.max_deta_h = r.max_deta_h.max(deta.abs());
        r.min_term = r.min_term.min(term);
        r.passed &= term > threshold / 2.0;
    }
    Ok(r)
}

/// Mixed central difference with one Richardson step.
fn mixed_difference(f: &dyn Fn(f64, f64) -> Option<f64>, x: f64, y: f64, h: f64) -> Option<f64> {
    let d = |h: f64| -> Option<f64> {
        Some((f(x + h, y + h)? - f(x + h, y - h)? - f(x - h, y + h)? + f(x - h, y - h)?) / (4.0 * h * h))
    };
    let (coarse, fine) = (d(h)?, d(h / 2.0)?);
    Some((4.0 * fine - coarse) / 3.0)
}

fn psi_or_none(q: &Poly<f64>, xi: f64, eta: f64) -> Option<f64> {
    dual_phase(q, xi, eta).ok().map(|d| d.psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedRow {
    pub alpha: f64,
    /// Smallest `|d_xi d_eta Xi_alpha|` over the usable samples.
    pub min_abs: Option<f64>,
    /// `min_abs / alpha`.
    pub c_probe: Option<f64>,
    pub used: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedReport {
    pub m0: i64,
    pub rows: Vec<MixedRow>,
    /// `log2(min_abs)` against `log2(alpha)` over positive `alpha`.
    pub fit: Option<DecayFit>,
}

/// `d_xi d_eta [Psi(xi, eta) - Psi(xi + 2^{-m0} alpha, eta - alpha)]` by finite differences.
pub fn mixed_derivative_probe(
    q: &Poly<f64>,
    pair: &AdmissiblePair,
    alphas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MixedReport> {
    if pair.d0 < 2 {
        return Err(Error::precondition("the mixed derivative probe needs d0 >= 2"));
    }
    let shift = crate::scalar::exp2i::<f64>(-pair.m0);
    let rows = alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let xi_fn = |x: f64, y: f64| Some(psi_or_none(q, x, y)? - psi_or_none(q, x + shift * alpha, y - alpha)?);
            let (mut min_abs, mut used, mut skipped) = (f64::INFINITY, 0, 0);
            for _ in 0..samples {
                let (xi, eta) = (annulus_sample(&mut rng), annulus_sample(&mut rng));
                let h = 1e-4 * xi.abs().max(eta.abs()).max(1.0);
                match mixed_difference(&xi_fn, xi, eta, h) {
                    Some(v) => {
                        used += 1;
                        min_abs = min_abs.min(v.abs());
                    }
                    None => skipped += 1,
                }
            }
            let min_abs = (used > 0).then_some(min_abs);
            MixedRow { alpha, min_abs, c_probe: min_abs.filter(|_| alpha > 0.0).map(|m| m / alpha), used, skipped }
        })
        .collect::<Vec<_>>();
    let pts: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| Some((r.alpha, r.min_abs?))).filter(|&(a, m)| a > 0.0 && m > 0.0).collect();
    let fit = if pts.len() >= 2 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0.log2()).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        DecayFit::fit_log2(&xs, &ys, 2).ok()
    } else {
        None
    };
    Ok(MixedReport { m0: pair.m0, rows, fit })
}

/// Axis-parallel rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

/// Dual phase `Psi(xi, eta) = eta psi(xi / eta)` with `psi` tabulated by
/// cubic Hermite interpolation; `psi'(s) = t_c(s, 1)` supplies the slopes.
pub struct PsiPhase {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PsiPhase {
    const NODES: usize = 1 << 14;

    /// Tabulates `Psi` on `rect` after checking that every sample has one
    /// nondegenerate critical point and that `H` keeps one sign.
    pub fn new(q: &Poly<f64>, rect: Rect) -> Result<Self> {
        let mut sign = 0.0;
        for i in 0..=32 {
            for k in 0..=32 {
                let xi = rect.x.0 + (rect.x.1 - rect.x.0) * i as f64 / 32.0;
                let eta = rect.y.0 + (rect.y.1 - rect.y.0) * k as f64 / 32.0;
                let d = dual_phase(q, xi, eta)
                    .map_err(|e| Error::precondition(format!("at ({xi}, {eta}): {e}")))?;
                if sign == 0.0 {
                    sign = d.h.signum();
                } else if d.h.signum() != sign {
                    return Err(Error::precondition("H changes sign inside the rectangle"));
                }
            }
        }
        if rect.y.0 * rect.y.1 <= 0.0 {
            return Err(Error::precondition("eta range must not contain 0"));
        }
        let ratios = [rect.x.0 / rect.y.0, rect.x.0 / rect.y.1, rect.x.1 / rect.y.0, rect.x.1 / rect.y.1];
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let step = (hi - lo) / (Self::NODES - 1) as f64;
        let mut values = Vec::with_capacity(Self::NODES);
        let mut slopes = Vec::with_capacity(Self::NODES);
        for i in 0..Self::NODES {
            let s = lo + step * i as f64;
            let d = dual_phase(q, s, 1.0).map_err(|e| Error::precondition(format!("at ratio {s}: {e}")))?;
            values.push(d.psi);
            slopes.push(d.t_c);
        }
        Ok(PsiPhase { lo, step, values, slopes })
    }

    fn psi1(&self, s: f64) -> f64 {
        let u = ((s - self.lo) / self.step).clamp(0.0, (Self::NODES - 1) as f64);
        let i = (u as usize).min(Self::NODES - 2);
        let x = u - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let (x2, x3) = (x * x, x * x * x);
        (2.0 * x3 - 3.0 * x2 + 1.0) * p0 + (x3 - 2.0 * x2 + x) * m0 + (-2.0 * x3 + 3.0 * x2) * p1 + (x3 - x2) * m1
    }

    pub fn eval(&self, xi: f64, eta: f64) -> f64 {
        eta * self.psi1(xi / eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HormanderRow {
    pub lambda: f64,
    /// Largest `|<T f, g>|` over unit `f, g` found by the trials.
    pub norm: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderReport {
    pub rows: Vec<HormanderRow>,
    pub fit: DecayFit,
}

const HORMANDER_MAX_GRID: usize = 4096;
const POWER_STEPS: usize = 24;

/// Norm of `f -> int e^{i lambda phi(x, y)} f(x) dx` from `L^2` of the x-side
/// of `rect` to `L^2` of the y-side, per `lambda`, then a log-log fit.
///
/// The separable parts of the phase are removed first because they do not
/// change the norm. Each trial runs a power iteration on the discretized
/// kernel from its own random start; the best Rayleigh value is kept.
pub fn hormander_decay_probe(
    phase: &(dyn Fn(f64, f64) -> f64 + Sync),
    rect: Rect,
    lambdas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<HormanderReport> {
    if trials == 0 {
        return Err(Error::precondition("at least one trial is needed"));
    }
    let (xc, yc) = (0.5 * (rect.x.0 + rect.x.1), 0.5 * (rect.y.0 + rect.y.1));
    let mixed = |x: f64, y: f64| phase(x, y) - phase(x, yc) - phase(xc, y) + phase(xc, yc);
    let (lx, ly) = (rect.x.1 - rect.x.0, rect.y.1 - rect.y.0);
    // largest slopes of the mixed part along each axis, from a coarse scan
    let (mut gx, mut gy) = (0.0f64, 0.0f64);
    let probe = 64;
    for i in 0..probe {
        for k in 0..probe {
            let x = rect.x.0 + lx * (i as f64 + 0.5) / probe as f64;
            let y = rect.y.0 + ly * (k as f64 + 0.5) / probe as f64;
            let (hx, hy) = (lx / probe as f64, ly / probe as f64);
            gx = gx.max(((mixed(x + hx / 2.0, y) - mixed(x - hx / 2.0, y)) / hx).abs());
            gy = gy.max(((mixed(x, y + hy / 2.0) - mixed(x, y - hy / 2.0)) / hy).abs());
        }
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for (li, &lambda) in lambdas.iter().enumerate() {
        let need = |g: f64, len: f64| (1.5 * lambda * g * len / PI).ceil().max(64.0) as usize;
        let (nx, ny) = (need(gx, lx).next_power_of_two(), need(gy, ly).next_power_of_two());
        if nx.max(ny) > HORMANDER_MAX_GRID {
            return Err(Error::precondition(format!(
                "lambda = {lambda} needs a {nx} x {ny} grid, above {HORMANDER_MAX_GRID}"
            )));
        }
        let (hx, hy) = (lx / nx as f64, ly / ny as f64);
        let w = (hx * hy).sqrt() as f32;
        // row-major ny x nx kernel
        let kernel: Vec<Complex<f32>> = (0..ny)
            .into_par_iter()
            .flat_map_iter(|k| {
                let y = rect.y.0 + hy * (k as f64 + 0.5);
                (0..nx).map(move |i| {
                    let x = rect.x.0 + hx * (i as f64 + 0.5);
                    let p = lambda * mixed(x, y);
                    Complex::new(w * p.cos() as f32, w * p.sin() as f32)
                })
            })
            .collect();
        let apply = |v: &[Complex<f32>]| -> Vec<Complex<f32>> {
            kernel.par_chunks(nx).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
        };
        let apply_adjoint = |u: &[Complex<f32>]| -> Vec<Complex<f32>> {
            let mut out = vec![Complex::new(0.0f32, 0.0); nx];
            for (row, &c) in kernel.chunks(nx).zip(u) {
                for (o, a) in out.iter_mut().zip(row) {
                    *o += a.conj() * c;
                }
            }
            out
        };
        let norm2 = |v: &[Complex<f32>]| v.iter().map(|z| z.norm_sqr() as f64).sum::<f64>().sqrt();
        let mut best = 0.0f64;
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((li as u64) << 32) | trial as u64);
            let mut v: Vec<Complex<f32>> =
                (0..nx).map(|_| Complex::new(rng.gen_range(-1.0f32..1.0), rng.gen_range(-1.0f32..1.0))).collect();
            for _ in 0..POWER_STEPS {
                let n = norm2(&v) as f32;
                v.iter_mut().for_each(|z| *z /= n);
                let u = apply(&v);
                best = best.max(norm2(&u));
                v = apply_adjoint(&u);
            }
        }
        rows.push(HormanderRow { lambda, norm: best, grid: nx.max(ny) });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.lambda.log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.norm).collect();
    Ok(HormanderReport { fit: DecayFit::fit_log2(&xs, &ys, 3)?, rows })
}

/// Output of [`claim45_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim45Report {
    pub d: usize,
    /// Coefficients of the expression as a polynomial in `t_c`, low to high.
    pub expression: Vec<f64>,
    pub degree: usize,
    pub expected_degree: usize,
    pub leading: f64,
    /// `-d^4 (d-1) c^3` for leading coefficient `c` of `R`.
    pub predicted_leading: f64,
    /// Real roots of the expression in `(1/2, 2)`.
    pub symbolic_roots: Vec<f64>,
    /// `t_c` locations where the finite-difference quantity changes sign.
    pub sign_changes: Vec<f64>,
    /// Smallest magnitude away from the sign changes.
    pub floor: f64,
    pub grid: usize,
    /// Sign changes never exceed `3d - 5`.
    pub bound_respected: bool,
}

impl Claim45Report {
    pub fn leading_ratio(&self) -> f64 {
        self.leading / self.predicted_leading
    }
}

/// `-2 (R' + 1 - 2^{-b1-1}) (R'')^2 + (R' + 1)(R' + 1 - 2^{-b1}) R'''` as a polynomial.
pub fn claim45_expression(r: &Poly<f64>, b1: i64) -> Poly<f64> {
    let r1 = r.derivative();
    let r2 = r1.derivative();
    let r3 = r2.derivative();
    let half = crate::scalar::exp2i::<f64>(-b1 - 1);
    let first = r1.add(&Poly::constant(1.0 - half)).mul(&r2).mul(&r2).scale(-2.0);
    let second = r1.add(&Poly::constant(1.0)).mul(&r1.add(&Poly::constant(1.0 - 2.0 * half))).mul(&r3);
    first.add(&second)
}

/// The critical point closest to `guess`, if it is nondegenerate.
fn t_c_near(q: &Poly<f64>, xi: f64, eta: f64, guess: f64) -> Option<f64> {
    critical_points(q, xi, eta)
        .ok()?
        .into_iter()
        .filter(|c| !c.degenerate)
        .min_by(|a, b| (a.t - guess).abs().partial_cmp(&(b.t - guess).abs()).unwrap())
        .map(|c| c.t)
}

/// Symbolic degree count and a finite-difference sign scan for the linear case.
pub fn claim45_check(q: &Poly<f64>, linear: &LinearCase, grid: usize) -> Result<Claim45Report> {
    let d = q.degree();
    if d < 2 || q.coeff(1) == 0.0 {
        return Err(Error::precondition("the linear case needs deg Q >= 2 and a linear term"));
    }
    if grid < 8 {
        return Err(Error::precondition("the sample grid needs at least 8 points"));
    }
    let mut r_coeffs = q.coeffs().to_vec();
    r_coeffs[0] = 0.0;
    r_coeffs[1] = 0.0;
    let r = Poly::new(r_coeffs);
    let expr = claim45_expression(&r, linear.b1);
    let c = r.coeff(d);
    let df = d as f64;
    let predicted_leading = -df.powi(4) * (df - 1.0) * c.powi(3);
    let symbolic_roots = real_roots_in(&expr, WINDOW.0, WINDOW.1)
        .into_iter()
        .map(|r| r.t)
        .filter(|&t| t > WINDOW.0 && t < WINDOW.1)
        .collect();
    let (q1, w) = (q.coeff(1), crate::scalar::exp2i::<f64>(-linear.b1));
    let eta = 1.0;
    let expected_degree = 3 * d - 5;
    let mut size = grid;
    for _ in 0..5 {
        let samples: Vec<(f64, Option<f64>)> = (0..size)
            .into_par_iter()
            .map(|i| {
                let t = WINDOW.0 + (WINDOW.1 - WINDOW.0) * (i as f64 + 0.5) / size as f64;
                let xi = -eta * q.eval(t, 1);
                let second = (eta * q.eval(t, 2)).abs();
                // choose steps that move t_c by about 1e-3
                let h = 1e-3 * second.min(xi.abs().max(eta.abs()).max(1.0));
                let g = |x: f64, y: f64| {
                    let tc = t_c_near(q, x, y, t)?;
                    Some((w - q1) * tc - r.eval(tc, 0))
                };
                (t, if h > 0.0 { mixed_difference(&g, xi, eta, h) } else { None })
            })
            .collect();
        let vals: Vec<(f64, f64)> = samples.iter().filter_map(|&(t, v)| Some((t, v?))).collect();
        let mut changes = Vec::new();
        let mut change_idx = Vec::new();
        for (k, pair) in vals.windows(2).enumerate() {
            if pair[0].1.signum() != pair[1].1.signum() {
                changes.push(0.5 * (pair[0].0 + pair[1].0));
                change_idx.push(k);
            }
        }
        let crowded = change_idx.windows(2).any(|p| p[1] - p[0] <= 1);
        if crowded {
            size *= 2;
            continue;
        }
        let floor = vals
            .iter()
            .enumerate()
            .filter(|(k, _)| change_idx.iter().all(|&c| (*k as i64 - c as i64).abs() > 2))
            .map(|(_, v)| v.1.abs())
            .fold(f64::INFINITY, f64::min);
        return Ok(Claim45Report {
            d,
            expression: expr.coeffs().to_vec(),
            degree: expr.degree(),
            expected_degree,
            leading: expr.coeff(expr.degree()),
            predicted_leading,
            symbolic_roots,
            bound_respected: changes.len() <= expected_degree,
            sign_changes: changes,
            floor,
            grid: size,
        });
    }
    Err(Error::precondition("sign changes stay adjacent after four refinements; the grid cannot isolate them"))
}
