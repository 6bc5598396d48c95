//! Gauss-Legendre rules and composite panel integration.

use crate::scalar::Real;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on the three-term Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::lit(n as f64);
        let one = T::one();
        let two = T::lit(2.0);
        for i in 0..(n + 1) / 2 {
            let guess = (T::PI() * (T::lit(i as f64) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut x = guess;
            let mut dp = one;
            for _ in 0..100 {
                let (mut p0, mut p1) = (one, x);
                for k in 2..=n {
                    let kf = T::lit(k as f64);
                    let p2 = ((two * kf - one) * x * p1 - (kf - one) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { one } else { p0 };
                dp = nf * (x * pn - pm) / (x * x - one);
                let dx = pn / dp;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            if n == 1 {
                dp = one;
                x = T::zero();
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n == 1 {
            weights[0] = two;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over `[a, b]` with `panels` equal panels.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T, panels: usize) -> T {
        let h = (b - a) / T::lit(panels as f64);
        let half = h / T::lit(2.0);
        let mut total = T::zero();
        for p in 0..panels {
            let mid = a + h * T::lit(p as f64) + half;
            let mut s = T::zero();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s = s + *w * f(mid + half * *x);
            }
            total = total + s * half;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 20] {
            let g = GaussLegendre::<f64>::new(n);
            let deg = 2 * n - 1;
            let v = g.integrate(|x| x.powi(deg as i32), 0.0, 1.0, 1);
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
            let wsum: f64 = g.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn composite_smooth_integral() {
        let g = GaussLegendre::<f64>::new(16);
        let v = g.integrate(f64::exp, 0.0, 1.0, 4);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let g32 = GaussLegendre::<f32>::new(8);
        let v32 = g32.integrate(|x| x * x, 0.0f32, 3.0, 2);
        assert!((v32 - 9.0).abs() < 1e-4);
    }
}
