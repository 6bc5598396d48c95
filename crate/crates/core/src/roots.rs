//! Real root isolation on an interval without companion matrices.
//!
//! The roots of `p` on `[lo, hi]` are bracketed between consecutive roots of
//! `p'`, found recursively. On each monotone piece a sign change is refined
//! by bisection. A critical point where `|p|` is within rounding of zero is
//! reported as a tangential (even multiplicity) root.

use crate::poly::{Evaluate, Poly};
use crate::scalar::Real;

/// A located root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub t: T,
    /// True when the root coincides with a critical point of the polynomial.
    pub tangential: bool,
}

fn bisect<T: Real>(p: &Poly<T>, mut a: T, mut b: T) -> T {
    let two = T::lit(2.0);
    let mut fa = p.eval(a, 0);
    for _ in 0..2000 {
        let m = (a + b) / two;
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval(m, 0);
        if fm.is_zero() {
            return m;
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) / two
}

/// Absolute tolerance for deciding that `p(t)` is zero.
fn zero_tol<T: Real>(p: &Poly<T>, t: T) -> T {
    T::lit(64.0) * T::epsilon() * T::lit((p.degree() + 1) as f64) * p.magnitude_at(t)
}

/// All real roots of `p` in the closed interval `[lo, hi]`, sorted.
///
/// The zero polynomial yields an empty list.
pub fn real_roots_in<T: Real>(p: &Poly<T>, lo: T, hi: T) -> Vec<Root<T>> {
    let mut out = Vec::new();
    if p.is_zero() || !(lo <= hi) {
        return out;
    }
    match p.degree() {
        0 => return out,
        1 => {
            let t = -p.coeff(0) / p.coeff(1);
            if t >= lo && t <= hi {
                out.push(Root { t, tangential: false });
            }
            return out;
        }
        _ => {}
    }
    let crit = real_roots_in(&p.derivative(), lo, hi);
    let mut knots = vec![lo];
    knots.extend(crit.iter().map(|r| r.t).filter(|&t| t > lo && t < hi));
    knots.push(hi);
    for (i, &a) in knots.iter().enumerate() {
        let fa = p.eval(a, 0);
        let is_crit = i > 0 && i + 1 < knots.len();
        if fa.is_zero() || (is_crit && fa.abs() <= zero_tol(p, a)) {
            out.push(Root { t: a, tangential: is_crit || p.eval(a, 1).abs() <= zero_tol(&p.derivative(), a) });
            continue;
        }
        if let Some(&b) = knots.get(i + 1) {
            let fb = p.eval(b, 0);
            let fb_zero = fb.is_zero() || (i + 2 < knots.len() && fb.abs() <= zero_tol(p, b));
            if !fb_zero && (fa > T::zero()) != (fb > T::zero()) {
                out.push(Root { t: bisect(p, a, b), tangential: false });
            }
        }
    }
    out.sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
    out.dedup_by(|x, y| (x.t - y.t).abs() <= T::lit(4.0) * T::epsilon() * x.t.abs().max(T::one()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        // (t-1)(t-2)(t+3) = t^3 - 7t + 6
        let p = Poly::new(vec![6.0, -7.0, 0.0, 1.0]);
        let r: Vec<f64> = real_roots_in(&p, -5.0, 5.0).iter().map(|r| r.t).collect();
        assert_eq!(r.len(), 3);
        for (x, y) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        let inside: Vec<f64> = real_roots_in(&p, 0.5, 1.5).iter().map(|r| r.t).collect();
        assert_eq!(inside.len(), 1);
    }

    #[test]
    fn tangential_root_flagged() {
        // (t-1)^2 (t+1)
        let p = Poly::new(vec![1.0f64, -1.0, -1.0, 1.0]);
        let r = real_roots_in(&p, 0.0, 2.0);
        assert_eq!(r.len(), 1);
        assert!(r[0].tangential);
        assert!((r[0].t - 1.0).abs() < 1e-7);
    }

    #[test]
    fn no_roots() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(real_roots_in(&p, -10.0, 10.0).is_empty());
        assert!(real_roots_in(&Poly::<f64>::zero(), 0.0, 1.0).is_empty());
    }

    #[test]
    fn clustered_roots_of_higher_degree() {
        // roots 0.6, 0.7, 0.8, 0.9, 1.0
        let mut p = Poly::constant(1.0f64);
        for r in [0.6, 0.7, 0.8, 0.9, 1.0] {
            p = p.mul(&Poly::new(vec![-r, 1.0]));
        }
        let r = real_roots_in(&p, 0.5, 2.0);
        assert_eq!(r.len(), 5);
        for (x, y) in r.iter().zip([0.6, 0.7, 0.8, 0.9, 1.0]) {
            assert!((x.t - y).abs() < 1e-9);
        }
    }
}
