//! Least-squares decay fits in log2 coordinates.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Straight-line fit `y ~ slope * x + intercept`, typically with
/// `y = log2(measured)` and `x` a dyadic exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual of the fitted line.
    pub max_residual: f64,
}

impl DecayFit {
    /// Ordinary least squares. Needs at least `min_points` distinct abscissae.
    pub fn fit(x: &[f64], y: &[f64], min_points: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Fit("abscissa and ordinate lengths differ".into()));
        }
        if x.len() < min_points.max(2) {
            return Err(Error::Fit(format!(
                "need at least {} usable points, got {}",
                min_points.max(2),
                x.len()
            )));
        }
        if y.iter().chain(x).any(|v| !v.is_finite()) {
            return Err(Error::Fit("non-finite data point".into()));
        }
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        if sxx == 0.0 {
            return Err(Error::Fit("abscissae are all equal".into()));
        }
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let max_residual = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - slope * a - intercept).abs())
            .fold(0.0, f64::max);
        Ok(DecayFit { x: x.to_vec(), y: y.to_vec(), slope, intercept, max_residual })
    }

    /// Fits `log2(values)` against `x`.
    pub fn fit_log2(x: &[f64], values: &[f64], min_points: usize) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Fit(format!("cannot take log2 of {v}")));
        }
        let y: Vec<f64> = values.iter().map(|v| v.log2()).collect();
        Self::fit(x, &y, min_points)
    }

    /// The decay exponent `gamma = -slope`.
    pub fn gamma(&self) -> f64 {
        -self.slope
    }
}
