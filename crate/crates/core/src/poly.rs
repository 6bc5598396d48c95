//! Polynomials: evaluation with derivatives, exact dyadic rescaling,
//! normalization to the unit scale, and monotone inversion.

use crate::error::{Error, Result};
use crate::scalar::{ldexp, Real};
use serde_json::{json, Map, Value};

/// Anything that can be evaluated together with its derivatives.
pub trait Evaluate<T: Real> {
    fn degree(&self) -> usize;

    /// The `order`-th derivative at `t`. Orders above the degree give zero.
    fn eval(&self, t: T, order: usize) -> T;
}

/// Horner evaluation of the `order`-th derivative of `sum c[r] t^r`.
fn horner<T: Real>(c: &[T], t: T, order: usize) -> T {
    if order >= c.len() {
        return T::zero();
    }
    let mut acc = T::zero();
    for r in (order..c.len()).rev() {
        let mut falling = T::one();
        for q in (r - order + 1)..=r {
            falling = falling * T::lit(q as f64);
        }
        acc = acc * t + c[r] * falling;
    }
    acc
}

/// A general real polynomial `c0 + c1 t + ... + cn t^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    /// Builds from coefficients in increasing degree. Trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![T::zero()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, r: usize) -> T {
        self.coeffs.get(r).copied().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(r, &c)| c * T::lit(r as f64))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|r| self.coeff(r) + other.coeff(r)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|r| self.coeff(r) - other.coeff(r)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (a, &x) in self.coeffs.iter().enumerate() {
            for (b, &y) in other.coeffs.iter().enumerate() {
                out[a + b] = out[a + b] + x * y;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: T) -> Self {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// Upper bound on the size of the terms summed when evaluating at `t`;
    /// used to set absolute zero tolerances.
    pub fn magnitude_at(&self, t: T) -> T {
        let at = t.abs();
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * at + c.abs())
    }
}

impl<T: Real> Evaluate<T> for Poly<T> {
    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval(&self, t: T, order: usize) -> T {
        horner(&self.coeffs, t, order)
    }
}

/// A monic real polynomial of degree at least two without constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPoly<T> {
    /// Index `r` holds `a_r`; index 0 is always zero.
    coeffs: Vec<T>,
}

impl<T: Real> MonicPoly<T> {
    /// Builds from `a_1, ..., a_d`. The last entry must equal one.
    pub fn new(a: &[T]) -> Result<Self> {
        let d = a.len();
        if d < 2 {
            return Err(Error::precondition(format!("degree must be at least 2, got {d}")));
        }
        if let Some((i, _)) = a.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::precondition(format!("coefficient a_{} is not finite", i + 1)));
        }
        if a[d - 1] != T::one() {
            return Err(Error::precondition(format!(
                "polynomial must be monic, leading coefficient is {}",
                a[d - 1]
            )));
        }
        let tiny = crate::scalar::exp2i::<T>(-900);
        for (i, c) in a.iter().enumerate() {
            if !c.is_zero() && c.abs() < tiny {
                log::warn!("coefficient a_{} = {} is below 2^-900", i + 1, c);
            }
        }
        let mut coeffs = Vec::with_capacity(d + 1);
        coeffs.push(T::zero());
        coeffs.extend_from_slice(a);
        Ok(MonicPoly { coeffs })
    }

    /// The monomial `t^d`.
    pub fn monomial(d: usize) -> Result<Self> {
        let mut a = vec![T::zero(); d];
        if let Some(last) = a.last_mut() {
            *last = T::one();
        }
        Self::new(&a)
    }

    /// Coefficient `a_r` (zero for `r = 0` or `r > d`).
    pub fn coeff(&self, r: usize) -> T {
        self.coeffs.get(r).copied().unwrap_or_else(T::zero)
    }

    /// `a_1, ..., a_d`.
    pub fn coefficients(&self) -> &[T] {
        &self.coeffs[1..]
    }

    /// The l1 norm `M = sum |a_r|`.
    pub fn l1_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.abs())
    }

    /// Indices `r` with `a_r != 0`.
    pub fn support(&self) -> Vec<usize> {
        (1..self.coeffs.len()).filter(|&r| !self.coeffs[r].is_zero()).collect()
    }

    pub fn as_poly(&self) -> Poly<T> {
        Poly::new(self.coeffs.clone())
    }

    /// Reads the JSON form `{"degree": d, "coeffs": {"1": a1, ..., "d": 1}}`.
    ///
    /// Missing coefficients are zero and a missing leading entry is taken to
    /// be one. A `"0"` key or a leading entry other than one is rejected.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::schema("", "polynomial must be a JSON object"))?;
        let degree = obj
            .get("degree")
            .ok_or_else(|| Error::schema("/degree", "missing field"))?
            .as_u64()
            .ok_or_else(|| Error::schema("/degree", "must be a nonnegative integer"))?
            as usize;
        if degree < 2 {
            return Err(Error::schema("/degree", "degree must be at least 2"));
        }
        let coeffs = obj
            .get("coeffs")
            .ok_or_else(|| Error::schema("/coeffs", "missing field"))?
            .as_object()
            .ok_or_else(|| Error::schema("/coeffs", "must be an object keyed by power"))?;
        let mut a = vec![T::zero(); degree];
        a[degree - 1] = T::one();
        for (key, val) in coeffs {
            let pointer = format!("/coeffs/{key}");
            let r: usize = key
                .parse()
                .map_err(|_| Error::schema(&pointer, "key must be a nonnegative integer"))?;
            if r == 0 {
                return Err(Error::schema(&pointer, "constant terms are not allowed"));
            }
            if r > degree {
                return Err(Error::schema(&pointer, "power exceeds the declared degree"));
            }
            let x = val
                .as_f64()
                .ok_or_else(|| Error::schema(&pointer, "coefficient must be a number"))?;
            if r == degree && x != 1.0 {
                return Err(Error::schema(&pointer, "leading coefficient must be 1"));
            }
            a[r - 1] = T::from_f64(x).ok_or_else(|| Error::schema(&pointer, "not representable"))?;
        }
        Self::new(&a)
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for r in 1..self.coeffs.len() {
            if !self.coeffs[r].is_zero() {
                map.insert(r.to_string(), json!(self.coeffs[r].as_f64()));
            }
        }
        json!({"degree": self.degree(), "coeffs": Value::Object(map)})
    }
}

impl<T: Real> Evaluate<T> for MonicPoly<T> {
    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval(&self, t: T, order: usize) -> T {
        horner(&self.coeffs, t, order)
    }
}

/// The dyadic rescale `t -> 2^{-ds} P(2^s t)`.
///
/// Coefficients are stored already scaled by `2^{(r-d)s}`, which makes the
/// Horner recurrence a power-of-two multiple of the direct one and hence
/// bit-identical to it away from the subnormal range.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPolynomial<T> {
    base: MonicPoly<T>,
    shift: i64,
    scaled: Vec<T>,
}

impl<T: Real> RescaledPolynomial<T> {
    pub fn new(base: MonicPoly<T>, shift: i64) -> Self {
        let d = base.degree() as i64;
        let scaled = (0..=base.degree())
            .map(|r| ldexp(base.coeff(r), (r as i64 - d) * shift))
            .collect();
        RescaledPolynomial { base, shift, scaled }
    }

    pub fn base(&self) -> &MonicPoly<T> {
        &self.base
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// The rescaled polynomial as an ordinary polynomial.
    pub fn as_poly(&self) -> Poly<T> {
        Poly::new(self.scaled.clone())
    }

    /// Direct evaluation `2^{-ds} P(2^s t)`, kept as a reference.
    pub fn eval_direct(&self, t: T) -> T {
        let d = self.base.degree() as i64;
        ldexp(self.base.eval(ldexp(t, self.shift), 0), -d * self.shift)
    }
}

impl<T: Real> Evaluate<T> for RescaledPolynomial<T> {
    fn degree(&self) -> usize {
        self.base.degree()
    }

    fn eval(&self, t: T, order: usize) -> T {
        horner(&self.scaled, t, order)
    }
}

/// `Q(t) = 2^{-m0+l-j} P(2^{j-l} t)`, whose coefficient of `t^r` is
/// `a_r 2^{(r-1)(j-l) - m0}`.
pub fn normalize_q<T: Real>(p: &MonicPoly<T>, j: i64, ell: i64, m0: i64) -> Result<Poly<T>> {
    let k = j - ell;
    let mut coeffs = vec![T::zero(); p.degree() + 1];
    for r in p.support() {
        let e = (r as i64 - 1) * k - m0;
        let c = ldexp(p.coeff(r), e);
        if !c.is_finite() {
            return Err(Error::OutOfRange { exponent: e });
        }
        if c.is_zero() {
            log::debug!("coefficient of t^{r} underflows at exponent {e}");
        }
        coeffs[r] = c;
    }
    Ok(Poly::new(coeffs))
}

/// Solves `q(t) = y` on a bracket where `q` is monotone.
///
/// Bisection shrinks the bracket before safeguarded Newton steps take
/// over; after 60 Newton iterations the routine reverts to bisection.
pub fn invert_monotone<T: Real, Q: Evaluate<T> + ?Sized>(q: &Q, y: T, bracket: (T, T)) -> Result<T> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::precondition("bracket must satisfy lo < hi"));
    }
    let scan = 64;
    let mut last_sign = 0i8;
    for i in 0..scan {
        let t = lo + (hi - lo) * T::lit(i as f64 / (scan - 1) as f64);
        let v = q.eval(t, 1);
        let s = if v > T::zero() { 1 } else if v < T::zero() { -1 } else { 0 };
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                return Err(Error::precondition(format!(
                    "derivative changes sign near t = {t}; bracket is not monotone"
                )));
            }
            last_sign = s;
        }
    }
    let tol = T::lit(1e-12) * y.abs().max(T::one());
    let (qlo, qhi) = (q.eval(lo, 0), q.eval(hi, 0));
    let increasing = qhi >= qlo;
    let (vmin, vmax) = if increasing { (qlo, qhi) } else { (qhi, qlo) };
    if y < vmin - tol || y > vmax + tol {
        return Err(Error::Domain(format!("{y} lies outside [{vmin}, {vmax}]")));
    }
    // residual sign convention: g(t) = q(t) - y is increasing in the oriented sense
    let g = |t: T| {
        let v = q.eval(t, 0) - y;
        if increasing { v } else { -v }
    };
    if g(lo).abs() <= tol {
        return Ok(lo);
    }
    if g(hi).abs() <= tol {
        return Ok(hi);
    }
    let two = T::lit(2.0);
    for _ in 0..8 {
        let mid = (lo + hi) / two;
        if g(mid) > T::zero() { hi = mid } else { lo = mid }
    }
    let mut t = (lo + hi) / two;
    for _ in 0..60 {
        let r = g(t);
        if r.abs() <= tol {
            return Ok(t);
        }
        if r > T::zero() { hi = t } else { lo = t }
        let slope = if increasing { q.eval(t, 1) } else { -q.eval(t, 1) };
        let newton = t - r / slope;
        t = if slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
    }
    loop {
        let mid = (lo + hi) / two;
        let r = g(mid);
        if r.abs() <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if r > T::zero() { hi = mid } else { lo = mid }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mp(a: &[f64]) -> MonicPoly<f64> {
        MonicPoly::new(a).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(mp(&[0.0, 1.0]).eval(3.0, 0), 9.0);
        assert_eq!(mp(&[1.0, 1.0]).eval(1.0, 1), 3.0);
        // P = t^3 + 2t, P'' = 6t
        assert_eq!(mp(&[2.0, 0.0, 1.0]).eval(0.5, 2), 3.0);
        assert_eq!(mp(&[2.0, 0.0, 1.0]).eval(0.5, 3), 6.0);
        assert_eq!(mp(&[2.0, 0.0, 1.0]).eval(0.5, 4), 0.0);
    }

    #[test]
    fn monic_construction_rules() {
        assert!(MonicPoly::new(&[1.0f64]).is_err());
        assert!(MonicPoly::new(&[0.0f64, 2.0]).is_err());
        let p = mp(&[-3.0, 0.0, 1.0]);
        assert_eq!(p.l1_norm(), 4.0);
        assert_eq!(p.support(), vec![1, 3]);
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let v: Value = serde_json::from_str(r#"{"degree": 3, "coeffs": {"1": 0.5, "3": 1}}"#).unwrap();
        let p = MonicPoly::<f64>::from_json(&v).unwrap();
        assert_eq!(p.coefficients(), &[0.5, 0.0, 1.0]);
        assert_eq!(MonicPoly::<f64>::from_json(&p.to_json()).unwrap(), p);
        let bad: Value = serde_json::from_str(r#"{"degree": 2, "coeffs": {"0": 1, "2": 1}}"#).unwrap();
        match MonicPoly::<f64>::from_json(&bad) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/coeffs/0"),
            other => panic!("unexpected {other:?}"),
        }
        let nonmonic: Value = serde_json::from_str(r#"{"degree": 2, "coeffs": {"2": 3}}"#).unwrap();
        assert!(MonicPoly::<f64>::from_json(&nonmonic).is_err());
        let implicit: Value = serde_json::from_str(r#"{"degree": 2, "coeffs": {}}"#).unwrap();
        assert_eq!(MonicPoly::<f64>::from_json(&implicit).unwrap(), mp(&[0.0, 1.0]));
    }

    #[test]
    fn normalize_q_examples() {
        let sq = mp(&[0.0, 1.0]);
        assert_eq!(normalize_q(&sq, 0, 1, -1).unwrap().coeffs(), &[0.0, 0.0, 1.0]);
        let cube = mp(&[0.0, 0.0, 1.0]);
        assert_eq!(normalize_q(&cube, 0, 0, 0).unwrap(), cube.as_poly());
        let p = mp(&[1.0, 1.0]);
        assert_eq!(normalize_q(&p, 4, 1, 3).unwrap().coeffs(), &[0.0, 0.125, 1.0]);
        match normalize_q(&p, 2000, 0, 0) {
            Err(Error::OutOfRange { exponent }) => assert_eq!(exponent, 2000),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invert_examples() {
        let sq = Poly::new(vec![0.0, 0.0, 1.0]);
        assert!((invert_monotone(&sq, 2.25f64, (1.0, 2.0)).unwrap() - 1.5).abs() < 1e-12);
        let q = Poly::new(vec![0.0, 1.0, 1.0]);
        assert!((invert_monotone(&q, 2.0f64, (0.5, 2.0)).unwrap() - 1.0).abs() < 1e-12);
        // independent oracle: plain bisection on t^3 + 0.1 t - 1.65
        let f = |t: f64| t * t * t + 0.1 * t - 1.65;
        let (mut a, mut b) = (0.5, 2.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 { b = m } else { a = m }
        }
        let cubic = Poly::new(vec![0.0, 0.1, 0.0, 1.0]);
        let t = invert_monotone(&cubic, 1.65, (0.5, 2.0)).unwrap();
        assert!((t - a).abs() < 1e-12, "{t} vs {a}");
        assert!(matches!(invert_monotone(&sq, 5.0, (1.0, 2.0)), Err(Error::Domain(_))));
        assert!(matches!(invert_monotone(&sq, 0.5, (-1.0, 1.0)), Err(Error::Precondition(_))));
        let dec = Poly::new(vec![0.0, -1.0]);
        assert!((invert_monotone(&dec, -0.75f64, (0.0, 1.0)).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = rng.gen_range(2..=6);
            let mut a: Vec<f64> = (0..d).map(|_| rng.gen_range(-8.0..8.0)).collect();
            a[d - 1] = 1.0;
            let p = mp(&a);
            for _ in 0..100 {
                let t: f64 = rng.gen_range(-2.0..2.0);
                let h = 1e-6;
                let fd = (p.eval(t + h, 0) - p.eval(t - h, 0)) / (2.0 * h);
                let exact = p.eval(t, 1);
                let scale = exact.abs().max(p.as_poly().derivative().magnitude_at(t));
                assert!((fd - exact).abs() <= 1e-6 * scale, "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn rescale_within_two_ulp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = rng.gen_range(2..=6);
            let mut a: Vec<f64> = (0..d).map(|_| rng.gen_range(-8.0..8.0)).collect();
            a[d - 1] = 1.0;
            let s = rng.gen_range(-6..=6);
            let r = RescaledPolynomial::new(mp(&a), s);
            for _ in 0..1000 {
                let t: f64 = rng.gen_range(-4.0..4.0);
                let (x, y) = (r.eval(t, 0), r.eval_direct(t));
                let ulp = (y.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
                assert!((x - y).abs() <= 2.0 * ulp, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let p = MonicPoly::<f32>::new(&[1.0, 1.0]).unwrap();
        assert_eq!(p.eval(2.0, 0), 6.0);
        let t = invert_monotone(&p, 6.0f32, (1.0, 3.0)).unwrap();
        assert!((t - 2.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn invert_then_eval_is_identity(a1 in -0.5f64..3.0, a2 in 0.0f64..2.0, u in 0.0f64..1.0) {
            // q' = a1 + 2 a2 t + 3 t^2 > 0 on [0.5, 2] for these ranges
            let q = Poly::new(vec![0.0, a1, a2, 1.0]);
            let y = q.eval(0.5, 0) + u * (q.eval(2.0, 0) - q.eval(0.5, 0));
            let t = invert_monotone(&q, y, (0.5, 2.0)).unwrap();
            prop_assert!((q.eval(t, 0) - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
    }
}
