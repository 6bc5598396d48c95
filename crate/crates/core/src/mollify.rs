//! Bump functions, grid functions on `[0,1]`, dyadic martingale averages,
//! periodic mollification and sharp Littlewood-Paley projections.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::scalar::{pairwise_sum, Real};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::OnceLock;

fn tau_profile(x: f64) -> f64 {
    if x <= 0.5 || x >= 2.0 {
        0.0
    } else {
        (-1.0 / ((x - 0.5) * (2.0 - x))).exp()
    }
}

fn step_profile(y: f64) -> f64 {
    if y <= 1.0 || y >= 2.0 {
        0.0
    } else {
        (-1.0 / ((y - 1.0) * (2.0 - y))).exp()
    }
}

fn rule() -> &'static GaussLegendre<f64> {
    static RULE: OnceLock<GaussLegendre<f64>> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// Normalizing constant of `tau`.
pub fn tau_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / rule().integrate(tau_profile, 0.5, 2.0, 64))
}

fn step_mass() -> f64 {
    static B: OnceLock<f64> = OnceLock::new();
    *B.get_or_init(|| rule().integrate(step_profile, 1.0, 2.0, 64))
}

/// Smoothstep equal to 1 on `[0,1]`, decreasing to 0 on `[1,2]`.
fn smoothstep(u: f64) -> f64 {
    if u <= 1.0 {
        1.0
    } else if u >= 2.0 {
        0.0
    } else if u >= 1.5 {
        rule().integrate(step_profile, u, 2.0, 16) / step_mass()
    } else {
        1.0 - rule().integrate(step_profile, 1.0, u, 16) / step_mass()
    }
}

/// Which of the two bump shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpKind {
    /// Supported in `[1/2, 2]` with unit integral.
    Tau,
    /// Even, supported in `[-2, 2]`, constant `1/3` on `[-1, 1]`, unit integral.
    Vartheta,
}

/// A bump dilated to level `l`: `b_l(x) = 2^l b(2^l x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bump {
    pub kind: BumpKind,
    pub level: i32,
}

impl Bump {
    pub fn tau(level: i32) -> Self {
        Bump { kind: BumpKind::Tau, level }
    }

    pub fn vartheta(level: i32) -> Self {
        Bump { kind: BumpKind::Vartheta, level }
    }

    /// The undilated profile at `x`.
    pub fn base(kind: BumpKind, x: f64) -> f64 {
        match kind {
            BumpKind::Tau => tau_constant() * tau_profile(x),
            // the even extension of the smoothstep has integral 3
            BumpKind::Vartheta => smoothstep(x.abs()) / 3.0,
        }
    }

    /// `b_l(x)`.
    pub fn eval<T: Real>(&self, x: T) -> T {
        let s = 2f64.powi(self.level);
        T::lit(s * Self::base(self.kind, s * x.as_f64()))
    }

    /// Closed support interval.
    pub fn support(&self) -> (f64, f64) {
        let s = 2f64.powi(-self.level);
        match self.kind {
            BumpKind::Tau => (0.5 * s, 2.0 * s),
            BumpKind::Vartheta => (-2.0 * s, 2.0 * s),
        }
    }

    /// Supremum of `b_l`.
    pub fn sup(&self) -> f64 {
        let s = 2f64.powi(self.level);
        match self.kind {
            // the profile peaks where (x - 1/2)(2 - x) is largest, at x = 5/4
            BumpKind::Tau => s * Self::base(BumpKind::Tau, 1.25),
            BumpKind::Vartheta => s / 3.0,
        }
    }
}

/// Real values on the `2^n` cells of `[0,1]`, one sample per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n: u32,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(n: u32, values: Vec<f64>) -> Result<Self> {
        if n > 30 {
            return Err(Error::precondition("grid resolution above 2^30"));
        }
        if values.len() != 1usize << n {
            return Err(Error::precondition(format!(
                "expected {} values for n = {n}, got {}",
                1usize << n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("grid values must be finite"));
        }
        Ok(GridFunction { n, values })
    }

    pub fn constant(n: u32, c: f64) -> Self {
        GridFunction { n, values: vec![c; 1 << n] }
    }

    /// Samples `f` at the cell midpoints.
    pub fn from_fn(n: u32, f: impl Fn(f64) -> f64) -> Self {
        let h = 1.0 / (1u64 << n) as f64;
        GridFunction { n, values: (0..1usize << n).map(|i| f((i as f64 + 0.5) * h)).collect() }
    }

    /// Indicator of a union of intervals; each cell holds its covered fraction,
    /// which is exactly 0 or 1 for cells not cut by an endpoint.
    pub fn indicator(n: u32, intervals: &[(f64, f64)]) -> Self {
        let size = 1usize << n;
        let h = 1.0 / size as f64;
        let mut values = vec![0.0; size];
        for &(a, b) in intervals {
            let (a, b) = (a.max(0.0), b.min(1.0));
            if b <= a {
                continue;
            }
            let first = ((a / h).floor() as usize).min(size - 1);
            let last = ((b / h).ceil() as usize).min(size);
            for (i, v) in values.iter_mut().enumerate().take(last).skip(first) {
                let lo = i as f64 * h;
                let cover = (b.min(lo + h) - a.max(lo)).max(0.0) / h;
                *v = (*v + cover).min(1.0);
            }
        }
        GridFunction { n, values }
    }

    /// Reads `{"n": .., "values": [..]}` or `{"n": .., "indicator": [[a, b], ..]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .ok_or_else(|| Error::schema("/n", "missing field"))?
            .as_u64()
            .filter(|&n| n <= 24)
            .ok_or_else(|| Error::schema("/n", "must be an integer in 0..=24"))? as u32;
        if let Some(vals) = v.get("values") {
            let arr = vals.as_array().ok_or_else(|| Error::schema("/values", "must be an array"))?;
            let mut out = Vec::with_capacity(arr.len());
            for (i, x) in arr.iter().enumerate() {
                out.push(x.as_f64().ok_or_else(|| Error::schema(format!("/values/{i}"), "must be a number"))?);
            }
            if out.len() != 1usize << n {
                return Err(Error::schema("/values", format!("expected {} entries", 1usize << n)));
            }
            return GridFunction::new(n, out);
        }
        if let Some(ind) = v.get("indicator") {
            let arr = ind.as_array().ok_or_else(|| Error::schema("/indicator", "must be an array"))?;
            let mut intervals = Vec::new();
            for (i, pair) in arr.iter().enumerate() {
                let p = format!("/indicator/{i}");
                let ab = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::schema(&p, "must be [a, b]"))?;
                let a = ab[0].as_f64().ok_or_else(|| Error::schema(format!("{p}/0"), "must be a number"))?;
                let b = ab[1].as_f64().ok_or_else(|| Error::schema(format!("{p}/1"), "must be a number"))?;
                if a > b {
                    return Err(Error::schema(&p, "interval endpoints out of order"));
                }
                intervals.push((a, b));
            }
            return Ok(GridFunction::indicator(n, &intervals));
        }
        Err(Error::schema("", "expected a \"values\" or \"indicator\" field"))
    }

    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "values": self.values})
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { n: self.n, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::precondition(format!("grid resolutions differ: {} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same(other)?;
        Ok(GridFunction {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Riemann sum of the values.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.cell()
    }

    /// Grid inner product `sum f g h`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| a * b)?.integral())
    }

    pub fn l1(&self) -> f64 {
        self.map(f64::abs).integral()
    }

    pub fn l2(&self) -> f64 {
        self.map(|v| v * v).integral().sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value of the piecewise constant extension (zero outside `[0,1)`).
    pub fn at(&self, x: f64) -> f64 {
        if !(0.0..1.0).contains(&x) {
            return 0.0;
        }
        self.values[((x * self.len() as f64) as usize).min(self.len() - 1)]
    }
}

/// The dyadic martingale average `E_k f`.
pub fn martingale_average(f: &GridFunction, k: u32) -> Result<GridFunction> {
    if k > f.n {
        return Err(Error::precondition(format!("k = {k} exceeds the grid resolution {}", f.n)));
    }
    let block = 1usize << (f.n - k);
    let mut values = Vec::with_capacity(f.len());
    for chunk in f.values.chunks(block) {
        let avg = pairwise_sum(chunk) / block as f64;
        values.extend(std::iter::repeat(avg).take(block));
    }
    Ok(GridFunction { n: f.n, values })
}

pub(crate) fn fft_forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse transform including the `1/N` factor.
pub(crate) fn fft_inverse(mut buf: Vec<Complex64>) -> Vec<Complex64> {
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

/// Signed frequency of DFT bin `i` on a grid of `size` cells.
pub(crate) fn signed_frequency(i: usize, size: usize) -> i64 {
    if i <= size / 2 { i as i64 } else { i as i64 - size as i64 }
}

/// Periodically wrapped samples of a bump at level `l`, normalized to sum 1.
pub fn discrete_kernel(n: u32, bump: &Bump) -> Result<Vec<f64>> {
    if bump.level < 0 || bump.level as u32 > n {
        return Err(Error::precondition(format!(
            "bump at level {} needs 0 <= level <= n; resolution n = {} is too coarse (need n >= {})",
            bump.level,
            n,
            bump.level.max(0)
        )));
    }
    let size = 1usize << n;
    let h = 1.0 / size as f64;
    let (lo, hi) = bump.support();
    let mut k = vec![0.0; size];
    let (ilo, ihi) = ((lo / h).floor() as i64, (hi / h).ceil() as i64);
    for i in ilo..=ihi {
        let v = bump.eval(i as f64 * h);
        if v != 0.0 {
            k[i.rem_euclid(size as i64) as usize] += v * h;
        }
    }
    let total = pairwise_sum(&k);
    if total <= 0.0 {
        return Err(Error::precondition("bump has no mass on this grid"));
    }
    k.iter_mut().for_each(|v| *v /= total);
    Ok(k)
}

/// Periodic convolution `f * b_l` with the normalized discrete kernel.
pub fn mollify_convolve(f: &GridFunction, bump: &Bump) -> Result<GridFunction> {
    let kernel = discrete_kernel(f.n, bump)?;
    let fh = fft_forward(&f.values);
    let kh = fft_forward(&kernel);
    let out = fft_inverse(fh.iter().zip(&kh).map(|(a, b)| a * b).collect());
    Ok(GridFunction { n: f.n, values: out.iter().map(|z| z.re).collect() })
}

/// Sharp projection onto integer frequencies with `|xi|` in `[2^m, 2^{m+1})`.
pub fn lp_project(f: &GridFunction, m: u32) -> Result<GridFunction> {
    if f.n < 2 || m > f.n - 2 {
        return Err(Error::precondition(format!(
            "band 2^{m} reaches the Nyquist frequency of a 2^{} grid",
            f.n
        )));
    }
    let size = f.len();
    let (lo, hi) = (1i64 << m, 1i64 << (m + 1));
    let mut fh = fft_forward(&f.values);
    for (i, z) in fh.iter_mut().enumerate() {
        let a = signed_frequency(i, size).abs();
        if a < lo || a >= hi {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    Ok(GridFunction { n: f.n, values: fft_inverse(fh).iter().map(|z| z.re).collect() })
}

/// Which form of the martingale lower bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    Dyadic,
    Smooth,
}

/// Both sides of the cubic lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BourgainBound {
    pub lhs: f64,
    pub rhs: f64,
    /// The constant multiplying `(int f)^3` (1 in dyadic mode).
    pub c0: f64,
}

impl BourgainBound {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

/// Smallest `C` with `E_k f <= C (f * vartheta_k)` for all nonnegative grid
/// `f` and all `0 <= k <= n`.
///
/// The bound follows from `f * K >= (min of K over one block) * sum over the block`.
pub fn domination_constant(n: u32) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        let kernel = discrete_kernel(n, &Bump::vartheta(k as i32))?;
        let b = 1usize << (n - k);
        let size = kernel.len();
        let min = (0..b).map(|i| kernel[i].min(kernel[(size - i) % size])).fold(f64::INFINITY, f64::min);
        worst = worst.max(1.0 / (b as f64 * min));
    }
    Ok(worst)
}

/// `(int f (E_k f)(E_l f), (int f)^3)` or the mollified analogue.
pub fn bourgain_lower_bound(f: &GridFunction, k: u32, ell: u32, mode: AverageMode) -> Result<BourgainBound> {
    if f.values.iter().any(|&v| v < 0.0) {
        return Err(Error::precondition("f must be nonnegative"));
    }
    if k > ell {
        return Err(Error::precondition("need k <= l"));
    }
    let mass = f.integral();
    let (a, b, c0) = match mode {
        AverageMode::Dyadic => (martingale_average(f, k)?, martingale_average(f, ell)?, 1.0),
        AverageMode::Smooth => {
            let c = domination_constant(f.n)?;
            (
                mollify_convolve(f, &Bump::vartheta(k as i32))?,
                mollify_convolve(f, &Bump::vartheta(ell as i32))?,
                c.powi(-2),
            )
        }
    };
    let prod = f.zip_with(&a, |x, y| x * y)?.zip_with(&b, |x, y| x * y)?;
    Ok(BourgainBound { lhs: prod.integral(), rhs: c0 * mass * mass * mass, c0 })
}

/// `sup_xi (sum_l |K_l(xi) - K_{l+1}(xi)|)^2` over the mollifier levels
/// `0..=top`, which bounds `sum_k ||f*K_{l_k} - f*K_{l_{k+1}}||^2 / ||f||^2` for
/// every increasing sequence of levels in that range.
pub fn orthogonality_constant(n: u32, top: u32) -> Result<f64> {
    if top > n {
        return Err(Error::precondition("top level exceeds the grid resolution"));
    }
    let spectra: Vec<Vec<Complex64>> = (0..=top)
        .map(|l| discrete_kernel(n, &Bump::vartheta(l as i32)).map(|k| fft_forward(&k)))
        .collect::<Result<_>>()?;
    let size = 1usize << n;
    let mut sup: f64 = 0.0;
    for xi in 0..size {
        let tv: f64 = spectra.windows(2).map(|w| (w[0][xi] - w[1][xi]).norm()).sum();
        sup = sup.max(tv * tv);
    }
    Ok(sup)
}
