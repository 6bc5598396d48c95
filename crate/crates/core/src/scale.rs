//! Dominating-monomial classification of dyadic scales and the admissible
//! set construction built on top of it.
//!
//! A scale `k` belongs to `J_r` when the monomial `a_r t^r` evaluated at
//! `t = 2^k` beats every other nonzero monomial by the factor `Gamma0 = 2^g0`.
//! All comparisons are carried out on exact (mantissa, exponent) pairs.

use crate::error::{Error, Result};
use crate::poly::{normalize_q, Evaluate, MonicPoly, Poly};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

/// The unique `b` with `|a|` in `[2^b, 2^{b+1})`.
pub fn dyadic_exponent<T: Real>(a: T) -> Result<i64> {
    if a.is_zero() || !a.is_finite() {
        return Err(Error::NoDyadicExponent { value: a.as_f64() });
    }
    let (mant, exp, _) = a.integer_decode();
    Ok(exp as i64 + 63 - mant.leading_zeros() as i64)
}

/// `|a| * 2^shift` as an exactly comparable pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Dyadic {
    /// Exponent of the leading bit.
    exp: i64,
    /// Mantissa left-aligned so that bit 63 is set.
    mant: u64,
}

impl Dyadic {
    fn of<T: Real>(a: T, shift: i64) -> Option<Self> {
        if a.is_zero() {
            return None;
        }
        let (mant, exp, _) = a.integer_decode();
        let lz = mant.leading_zeros();
        Some(Dyadic { exp: exp as i64 + 63 - lz as i64 + shift, mant: mant << lz })
    }

    fn shifted(self, s: i64) -> Self {
        Dyadic { exp: self.exp + s, ..self }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        self.exp.cmp(&o.exp).then(self.mant.cmp(&o.mant))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Constants of the scale decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleParams {
    /// `Gamma0 = 2^g0`.
    pub g0: i64,
    /// Largeness threshold for `|b_r + (r-1)(j-l)|`.
    pub theta: i64,
}

impl Default for ScaleParams {
    fn default() -> Self {
        ScaleParams { g0: 10, theta: 30 }
    }
}

impl ScaleParams {
    pub fn new(g0: i64, theta: i64) -> Result<Self> {
        if g0 < 0 {
            return Err(Error::precondition("g0 must be nonnegative"));
        }
        if theta < 1 {
            return Err(Error::precondition("theta must be at least 1"));
        }
        Ok(ScaleParams { g0, theta })
    }

    /// The large choice `g0 = 100 d!`. Its `Gamma_d` is far beyond any
    /// machine integer, so it only supports classification.
    pub fn textbook(d: usize, theta: i64) -> Self {
        let fact: i64 = (1..=d as i64).product();
        ScaleParams { g0: 100 * fact, theta }
    }

    /// `Gamma_d = 4 d^2 2^g0` when it fits in an `i64`.
    pub fn gamma_d(&self, d: usize) -> Option<i64> {
        let base = 4i64.checked_mul((d * d) as i64)?;
        if self.g0 >= 62 {
            return None;
        }
        base.checked_mul(1i64 << self.g0)
    }
}

/// Per-scale verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub k: i64,
    /// The `r` with `k` in `J_r`, if any.
    pub dominating: Option<usize>,
    /// The `r >= 2` with `k` in `J_{1,r}`, if any.
    pub secondary: Option<usize>,
    pub good: bool,
}

/// Classification of every scale in a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleClassification {
    pub window: (i64, i64),
    pub records: Vec<ScaleRecord>,
    pub j_r: BTreeMap<usize, Vec<i64>>,
    pub j_1r: BTreeMap<usize, Vec<i64>>,
    pub good: Vec<i64>,
    pub bad: Vec<i64>,
}

impl ScaleClassification {
    pub fn record(&self, k: i64) -> Option<&ScaleRecord> {
        let (lo, hi) = self.window;
        if k < lo || k > hi {
            return None;
        }
        self.records.get((k - lo) as usize)
    }
}

/// Exponent envelope containing every scale at which two nonzero monomials
/// are within a factor `2^{g0+1}` of each other, for any pair of them.
pub fn default_window<T: Real>(p: &MonicPoly<T>, params: &ScaleParams) -> RangeInclusive<i64> {
    let bmax = p
        .support()
        .into_iter()
        .filter_map(|r| dyadic_exponent(p.coeff(r)).ok())
        .map(i64::abs)
        .max()
        .unwrap_or(0);
    let w = params.g0 + 2 * bmax + p.degree() as i64 + 1;
    -w..=w
}

/// Does monomial `r` beat every monomial `r'` outside `excluded` by `Gamma0` at scale `k`?
fn beats<T: Real>(p: &MonicPoly<T>, g0: i64, k: i64, r: usize, excluded: &[usize]) -> bool {
    let lhs = match Dyadic::of(p.coeff(r), r as i64 * k) {
        Some(v) => v,
        None => return false,
    };
    p.support()
        .into_iter()
        .filter(|&q| q != r && !excluded.contains(&q))
        .all(|q| {
            let rhs = Dyadic::of(p.coeff(q), q as i64 * k).expect("support is nonzero");
            lhs > rhs.shifted(g0)
        })
}

fn classify_one<T: Real>(p: &MonicPoly<T>, g0: i64, k: i64) -> ScaleRecord {
    let support = p.support();
    let dominating = support.iter().copied().find(|&r| beats(p, g0, k, r, &[]));
    let secondary = if dominating == Some(1) {
        support.iter().copied().filter(|&r| r >= 2).find(|&r| beats(p, g0, k, r, &[1]))
    } else {
        None
    };
    let good = matches!(dominating, Some(r) if r >= 2) || secondary.is_some();
    ScaleRecord { k, dominating, secondary, good }
}

/// Classifies every scale of `window`.
pub fn classify_scales<T: Real>(
    p: &MonicPoly<T>,
    params: &ScaleParams,
    window: RangeInclusive<i64>,
) -> Result<ScaleClassification> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo > hi {
        return Err(Error::precondition("empty scale window"));
    }
    let records: Vec<ScaleRecord> = (lo..=hi).map(|k| classify_one(p, params.g0, k)).collect();
    let mut j_r: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    let mut j_1r: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    let (mut good, mut bad) = (Vec::new(), Vec::new());
    for rec in &records {
        if let Some(r) = rec.dominating {
            j_r.entry(r).or_default().push(rec.k);
        }
        if let Some(r) = rec.secondary {
            j_1r.entry(r).or_default().push(rec.k);
        }
        if rec.good { good.push(rec.k) } else { bad.push(rec.k) }
    }
    Ok(ScaleClassification { window: (lo, hi), records, j_r, j_1r, good, bad })
}

/// Scales where monomials `r1` and `r2` are within a factor `Gamma0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    pub scales: Vec<i64>,
    /// Set when one of the two coefficients vanishes.
    pub zero_coefficient: bool,
}

pub fn pair_sets<T: Real>(
    r1: usize,
    r2: usize,
    p: &MonicPoly<T>,
    params: &ScaleParams,
    window: RangeInclusive<i64>,
) -> Result<PairSet> {
    if r1 == r2 {
        return Err(Error::precondition("pair_sets needs two distinct degrees"));
    }
    let (a1, a2) = (p.coeff(r1), p.coeff(r2));
    if a1.is_zero() || a2.is_zero() {
        log::warn!("pair ({r1}, {r2}) involves a zero coefficient");
        return Ok(PairSet { scales: vec![], zero_coefficient: true });
    }
    let scales = window
        .filter(|&k| {
            let x = Dyadic::of(a1, r1 as i64 * k).unwrap();
            let y = Dyadic::of(a2, r2 as i64 * k).unwrap();
            x <= y.shifted(params.g0) && y <= x.shifted(params.g0)
        })
        .collect();
    Ok(PairSet { scales, zero_coefficient: false })
}

/// Extra data when the linear term dominates at the pair's scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCase {
    pub d1: usize,
    pub b1: i64,
    pub q0: i64,
}

/// A pair `(j, l)` in `E x Lambda` with its derived exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub j: i64,
    pub ell: i64,
    /// Degree of the polynomial the pair was built for.
    pub d: usize,
    pub d0: usize,
    pub m0: i64,
    pub linear: Option<LinearCase>,
}

impl AdmissiblePair {
    /// Derives `d0`, `m0` and the linear-case data at scale `k = j - l`.
    pub fn at<T: Real>(p: &MonicPoly<T>, params: &ScaleParams, j: i64, ell: i64) -> Result<Self> {
        let k = j - ell;
        let rec = classify_one(p, params.g0, k);
        if !rec.good {
            return Err(Error::precondition(format!("scale {k} is bad")));
        }
        let d0 = rec.dominating.expect("good scales have a dominating degree");
        let m0 = dyadic_exponent(p.coeff(d0))? + (d0 as i64 - 1) * k;
        let linear = if d0 == 1 {
            let d1 = rec.secondary.expect("good linear scales have a secondary degree");
            let b1 = dyadic_exponent(p.coeff(1))?;
            let q0 = dyadic_exponent(p.coeff(d1))? + (d1 as i64 - 1) * k - b1;
            Some(LinearCase { d1, b1, q0 })
        } else {
            None
        };
        Ok(AdmissiblePair { j, ell, d: p.degree(), d0, m0, linear })
    }

    /// `log2(lambda) = m + m0 - (d-1) j - l`.
    pub fn lambda_exponent(&self, m: i64) -> i64 {
        m + self.m0 - (self.d as i64 - 1) * self.j - self.ell
    }

    /// The normalized polynomial `Q` for this pair.
    pub fn q_polynomial<T: Real>(&self, p: &MonicPoly<T>) -> Result<Poly<T>> {
        normalize_q(p, self.j, self.ell, self.m0)
    }

    /// Whether `|b_r + (r-1)(j-l)| >= theta` for every nonzero `a_r`, `r >= 2`.
    pub fn satisfies_largeness<T: Real>(&self, p: &MonicPoly<T>, theta: i64) -> bool {
        let k = self.j - self.ell;
        p.support().into_iter().filter(|&r| r >= 2).all(|r| {
            let b = dyadic_exponent(p.coeff(r)).expect("support is nonzero");
            (b + (r as i64 - 1) * k).abs() >= theta
        })
    }
}

/// Output of [`build_admissible`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSets {
    pub gamma_d: i64,
    /// Common offset `c = l_i - j_i`.
    pub offset: i64,
    pub e: Vec<i64>,
    pub lambda: Vec<i64>,
    pub pairs: Vec<AdmissiblePair>,
}

impl AdmissibleSets {
    /// First element and consecutive gaps of a list are at most `bound`.
    pub fn is_admissible_list(xs: &[i64], bound: i64) -> bool {
        !xs.is_empty()
            && xs[0] >= 0
            && xs[0] <= bound
            && xs.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= bound)
    }
}

/// Builds interlaced admissible sets `E = {i Gamma_d}` and
/// `Lambda = {i Gamma_d + c}`.
///
/// Every diagonal pair then sits at the scale `-c`. The offset `c` is the
/// least value in `[1, Gamma_d)` whose residue `-c` avoids the bad scales
/// and meets the largeness threshold. Since bad scales number at most
/// `Gamma_d`, and in practice far fewer, some residue is always free.
pub fn build_admissible<T: Real>(
    p: &MonicPoly<T>,
    params: &ScaleParams,
    count: usize,
) -> Result<AdmissibleSets> {
    if count == 0 {
        return Err(Error::precondition("count must be at least 1"));
    }
    let d = p.degree();
    let gamma_d = params.gamma_d(d).ok_or(Error::OutOfRange { exponent: params.g0 })?;
    let classes = classify_scales(p, params, default_window(p, params))?;
    let bad_residues: BTreeSet<i64> = classes.bad.iter().map(|k| k.rem_euclid(gamma_d)).collect();
    let exps: Vec<(usize, i64)> = p
        .support()
        .into_iter()
        .filter(|&r| r >= 2)
        .map(|r| (r, dyadic_exponent(p.coeff(r)).unwrap()))
        .collect();
    let offset = (1..gamma_d).find(|&c| {
        !bad_residues.contains(&(-c).rem_euclid(gamma_d))
            && exps.iter().all(|&(r, b)| (b - (r as i64 - 1) * c).abs() >= params.theta)
    });
    let c = offset.ok_or_else(|| Error::ConstructionExhausted {
        residues: bad_residues.iter().copied().collect(),
    })?;
    let mut e = Vec::with_capacity(count);
    let mut lambda = Vec::with_capacity(count);
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count as i64 {
        let j = i.checked_mul(gamma_d).ok_or(Error::OutOfRange { exponent: 63 })?;
        let ell = j + c;
        let pair = AdmissiblePair::at(p, params, j, ell)?;
        debug_assert!(pair.satisfies_largeness(p, params.theta));
        e.push(j);
        lambda.push(ell);
        pairs.push(pair);
    }
    Ok(AdmissibleSets { gamma_d, offset: c, e, lambda, pairs })
}
