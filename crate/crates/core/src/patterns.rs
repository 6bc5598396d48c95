//! Interval sets on `[0, N]`, exact pattern search for `x, x + t, x + P(t)`,
//! gap measurement and generators of test sets.
//!
//! Sets are finite unions of closed intervals. For a fixed step `t` the
//! admissible starting points form `S ∩ (S - t) ∩ (S - P(t))`, which is again a
//! finite union of closed intervals. The set of steps admitting a pattern is
//! closed, and its supremum is either the top of the search range or a step at
//! which two shifted endpoints coincide. The search enumerates those critical
//! steps and their grid-quantized neighbours, largest first.

use crate::error::{Error, Result};
use crate::poly::{Evaluate, MonicPoly, Poly, RescaledPolynomial};
use crate::roots::real_roots_in;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Sorted, disjoint closed intervals inside `[0, N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    horizon: f64,
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Builds a set, sorting the pieces and merging overlapping or touching ones.
    pub fn new(horizon: f64, mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if !(horizon.is_finite() && horizon >= 1.0) {
            return Err(Error::precondition("the horizon N must be a finite number at least 1"));
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && 0.0 <= a && a <= b && b <= horizon) {
                return Err(Error::schema(
                    format!("/intervals/{i}"),
                    format!("[{a}, {b}] is not an interval inside [0, {horizon}]"),
                ));
            }
        }
        intervals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(IntervalSet { horizon, intervals: merged })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(horizon, Vec::new())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn density(&self) -> f64 {
        self.measure() / self.horizon
    }

    /// Exact closed-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|&(a, _)| a <= x);
        idx > 0 && x <= self.intervals[idx - 1].1
    }

    /// `self ⊆ other`, tested interval by interval.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals.iter().all(|&(a, b)| {
            let idx = other.intervals.partition_point(|&(c, _)| c <= a);
            idx > 0 && b <= other.intervals[idx - 1].1
        })
    }

    /// Reads `{"N": .., "intervals": [[a, b], ..]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let horizon = v
            .get("N")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::schema("/N", "expected a number"))?;
        let list = v
            .get("intervals")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::schema("/intervals", "expected an array"))?;
        let mut intervals = Vec::with_capacity(list.len());
        for (i, item) in list.iter().enumerate() {
            let pair = item.as_array().filter(|a| a.len() == 2);
            let ends = pair.and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)));
            intervals.push(ends.ok_or_else(|| Error::schema(format!("/intervals/{i}"), "expected [a, b]"))?);
        }
        Self::new(horizon, intervals)
    }

    pub fn to_json(&self) -> Value {
        json!({"N": self.horizon, "intervals": self.intervals.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>()})
    }

    fn endpoints(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
        e.dedup();
        e
    }
}

/// Intersection of two sorted disjoint closed-interval lists.
fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut k) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && k < b.len() {
        let lo = a[i].0.max(b[k].0);
        let hi = a[i].1.min(b[k].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[k].1 {
            i += 1;
        } else {
            k += 1;
        }
    }
    out
}

fn shifted(s: &IntervalSet, by: f64) -> Vec<(f64, f64)> {
    s.intervals.iter().map(|&(a, b)| (a - by, b - by)).collect()
}

/// A verified pattern `x, x + t, x + P(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternInstance {
    pub x: f64,
    pub t: f64,
    pub points: [f64; 3],
    /// `t / N^{1/d}`.
    pub gap_ratio: f64,
}

impl PatternInstance {
    /// Re-checks membership of the three points with zero tolerance.
    pub fn verify(&self, s: &IntervalSet, p: &MonicPoly<f64>) -> bool {
        let pts = [self.x, self.x + self.t, self.x + p.eval(self.t, 0)];
        self.t > 0.0 && pts == self.points && pts.iter().all(|&y| s.contains(y))
    }
}

/// Outcome of [`find_pattern`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PatternSearch {
    Found(PatternInstance),
    /// No pattern with a step in the requested range. `largest_step` is the
    /// largest step admitting a pattern over the whole range, when one exists.
    NotFound { largest_step: Option<f64> },
}

/// Tries to exhibit a pattern with step exactly `t`.
fn pattern_at(s: &IntervalSet, p: &MonicPoly<f64>, t: f64, scale: f64) -> Option<PatternInstance> {
    if !(t > 0.0) {
        return None;
    }
    let pt = p.eval(t, 0);
    let cut = intersect(&intersect(&s.intervals, &shifted(s, t)), &shifted(s, pt));
    for &(lo, hi) in &cut {
        let mid = 0.5 * (lo + hi);
        for x in [mid, lo, hi, lo.next_up(), hi.next_down()] {
            let points = [x, x + t, x + pt];
            if points.iter().all(|&y| s.contains(y)) {
                return Some(PatternInstance { x, t, points, gap_ratio: t / scale });
            }
        }
    }
    None
}

/// Steps where two shifted endpoints meet, inside `(lo, hi]`.
fn critical_steps(s: &IntervalSet, p: &MonicPoly<f64>, lo: f64, hi: f64) -> Vec<f64> {
    let ends = s.endpoints();
    let mut diffs: Vec<f64> = Vec::with_capacity(ends.len() * ends.len());
    for &a in &ends {
        for &b in &ends {
            diffs.push(a - b);
        }
    }
    diffs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    diffs.dedup();
    let base = p.as_poly();
    let minus_t = base.sub(&Poly::new(vec![0.0, 1.0]));
    let mut out = Vec::new();
    let window = (lo.max(0.0), hi);
    for &c in &diffs {
        if c > window.0 && c <= hi {
            out.push(c);
        }
        for q in [&base, &minus_t] {
            let shifted = q.sub(&Poly::constant(c));
            if shifted.is_zero() {
                continue;
            }
            out.extend(real_roots_in(&shifted, window.0, hi).into_iter().map(|r| r.t));
        }
    }
    out
}

fn search(s: &IntervalSet, p: &MonicPoly<f64>, lo: f64, grid: u64) -> Result<Option<PatternInstance>> {
    if grid < 1 << 10 {
        return Err(Error::precondition("the t grid needs at least 2^10 points per unit"));
    }
    if s.is_empty() {
        return Ok(None);
    }
    let scale = s.horizon.powf(1.0 / p.degree() as f64);
    let hi = scale;
    let step = 1.0 / grid as f64;
    let mut candidates = vec![hi];
    for c in critical_steps(s, p, lo, hi) {
        candidates.push(c);
        candidates.push(c.next_down());
        candidates.push(c.next_up());
        candidates.push((c / step).floor() * step);
    }
    candidates.retain(|&t| t > lo && t <= hi);
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    candidates.dedup();
    Ok(candidates.into_iter().find_map(|t| pattern_at(s, p, t, scale)))
}

/// Looks for the pattern with the largest step in `(delta N^{1/d}, N^{1/d}]`.
pub fn find_pattern(s: &IntervalSet, p: &MonicPoly<f64>, delta: f64, grid: u64) -> Result<PatternSearch> {
    if !(delta >= 0.0) {
        return Err(Error::precondition("delta must be nonnegative"));
    }
    let scale = s.horizon.powf(1.0 / p.degree() as f64);
    if let Some(inst) = search(s, p, delta * scale, grid)? {
        return Ok(PatternSearch::Found(inst));
    }
    let largest_step = if delta > 0.0 { search(s, p, 0.0, grid)?.map(|i| i.t) } else { None };
    Ok(PatternSearch::NotFound { largest_step })
}

/// Largest step admitting a pattern, or 0 when none exists.
pub fn max_gap(s: &IntervalSet, p: &MonicPoly<f64>, grid: u64) -> Result<f64> {
    Ok(search(s, p, 0.0, grid)?.map_or(0.0, |i| i.t))
}

/// `S` moved to `[0, 1]` after padding `N` to `2^{jd}`.
#[derive(Debug, Clone)]
pub struct RescaledInstance {
    pub set: IntervalSet,
    pub j: i64,
    pub polynomial: RescaledPolynomial<f64>,
    /// Density after padding, `eps N / 2^{jd}`.
    pub density: f64,
}

pub fn rescale_instance(s: &IntervalSet, p: &MonicPoly<f64>) -> Result<RescaledInstance> {
    let d = p.degree() as i64;
    let mut j = 0i64;
    while 2f64.powi((j * d) as i32) < s.horizon {
        j += 1;
    }
    let padded = 2f64.powi((j * d) as i32);
    let set = IntervalSet::new(1.0, s.intervals.iter().map(|&(a, b)| (a / padded, b / padded)).collect())?;
    Ok(RescaledInstance { density: s.measure() / padded, set, j, polynomial: RescaledPolynomial::new(p.clone(), j) })
}

/// `int_0^{N^{1/d}} |S ∩ (S - t) ∩ (S - P(t))| dt` by the midpoint rule.
pub fn pattern_measure(s: &IntervalSet, p: &MonicPoly<f64>, nodes: usize) -> f64 {
    let top = s.horizon.powf(1.0 / p.degree() as f64);
    let dt = top / nodes as f64;
    let terms: Vec<f64> = (0..nodes)
        .map(|i| {
            let t = (i as f64 + 0.5) * dt;
            let cut = intersect(&intersect(&s.intervals, &shifted(s, t)), &shifted(s, p.eval(t, 0)));
            cut.iter().map(|(a, b)| b - a).sum()
        })
        .collect();
    crate::scalar::pairwise_sum(&terms) * dt
}

/// Families of test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    /// One interval of random length and position per cell.
    Random,
    /// Self-similar two-piece construction.
    Cantor,
    /// Equal blocks, one per cell, each at a random offset.
    ShiftedBlocks,
}

impl std::str::FromStr for SetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SetKind::Random),
            "cantor" => Ok(SetKind::Cantor),
            "shifted-blocks" => Ok(SetKind::ShiftedBlocks),
            other => Err(Error::precondition(format!("unknown set kind {other:?}"))),
        }
    }
}

const CELLS: usize = 16;
const MAX_CANTOR_LEVELS: u32 = 16;

/// A set of density `epsilon` inside `[0, N]`, deterministic in `seed`.
///
/// The Cantor kind uses `ceil(log2(1/epsilon))` levels unless `levels` says
/// otherwise, and keeps two pieces per interval per level.
pub fn adversarial_sets(
    kind: SetKind,
    epsilon: f64,
    horizon: f64,
    seed: u64,
    levels: Option<u32>,
) -> Result<IntervalSet> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::precondition("density must lie in (0, 1]"));
    }
    if epsilon == 1.0 {
        return IntervalSet::new(horizon, vec![(0.0, horizon)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = horizon / CELLS as f64;
    let intervals = match kind {
        SetKind::Random => {
            let lengths = capped_lengths(&mut rng, epsilon * horizon, cell);
            lengths
                .iter()
                .enumerate()
                .map(|(i, &len)| {
                    let start = i as f64 * cell + rng.gen_range(0.0..=1.0) * (cell - len);
                    (start, start + len)
                })
                .collect()
        }
        SetKind::ShiftedBlocks => {
            let len = epsilon * cell;
            (0..CELLS)
                .map(|i| {
                    let start = i as f64 * cell + rng.gen_range(0.0..=1.0) * (cell - len);
                    (start, start + len)
                })
                .collect()
        }
        SetKind::Cantor => {
            let levels = levels.unwrap_or_else(|| (1.0 / epsilon).log2().ceil() as u32).max(1);
            if levels > MAX_CANTOR_LEVELS {
                return Err(Error::precondition(format!(
                    "{levels} Cantor levels would need 2^{levels} pieces; ask for at most {MAX_CANTOR_LEVELS} levels"
                )));
            }
            let ratio = epsilon.powf(1.0 / levels as f64) / 2.0;
            let mut pieces = vec![(0.0, horizon)];
            for _ in 0..levels {
                pieces = pieces
                    .iter()
                    .flat_map(|&(a, b)| {
                        let keep = ratio * (b - a);
                        [(a, a + keep), (b - keep, b)]
                    })
                    .collect();
            }
            pieces
        }
    };
    // clamp rounding spill at the right edge
    let intervals = intervals.into_iter().map(|(a, b): (f64, f64)| (a.max(0.0), b.min(horizon))).collect();
    IntervalSet::new(horizon, intervals)
}

/// Random lengths, each at most `cap`, summing to `total`.
fn capped_lengths(rng: &mut ChaCha8Rng, total: f64, cap: f64) -> Vec<f64> {
    let weights: Vec<f64> = (0..CELLS).map(|_| rng.gen_range(0.1..1.0)).collect();
    let mut lengths = vec![0.0; CELLS];
    let mut free: Vec<usize> = (0..CELLS).collect();
    let mut remaining = total;
    // water filling: saturated cells are fixed at the cap and the rest rescaled
    while remaining > 0.0 && !free.is_empty() {
        let wsum: f64 = free.iter().map(|&i| weights[i]).sum();
        let over: Vec<usize> = free.iter().copied().filter(|&i| remaining * weights[i] / wsum >= cap).collect();
        if over.is_empty() {
            for &i in &free {
                lengths[i] = remaining * weights[i] / wsum;
            }
            break;
        }
        for &i in &over {
            lengths[i] = cap;
            remaining -= cap;
        }
        free.retain(|i| !over.contains(i));
    }
    lengths
}
