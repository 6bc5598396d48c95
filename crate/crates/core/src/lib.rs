//! Computational toolkit for polynomial Roth patterns `x, x+t, x+P(t)` on the
//! real line.
//!
//! The generic modules ([`poly`], [`roots`], [`quad`], [`scale`],
//! [`oscillatory`]) work over any [`Real`] scalar. The grid and interval
//! modules are fixed to `f64` because they lean on FFTs and exact interval
//! arithmetic in double precision. The
//! aliases below name the `f64` instantiations used by the command line tool.

pub mod error;
pub mod fit;
pub mod mollify;
pub mod oscillatory;
pub mod patterns;
pub mod poly;
pub mod quad;
pub mod roots;
pub mod scalar;
pub mod scale;
pub mod trilinear;

pub use error::{Error, Result};
pub use fit::DecayFit;
pub use mollify::{Bump, BumpKind, GridFunction};
pub use scalar::Real;
pub use scale::{AdmissiblePair, ScaleParams};

/// Monic polynomial with `f64` coefficients.
pub type Polynomial = poly::MonicPoly<f64>;
/// General real polynomial with `f64` coefficients.
pub type RealPolynomial = poly::Poly<f64>;
/// Dyadic rescale of a [`Polynomial`].
pub type RescaledPolynomial = poly::RescaledPolynomial<f64>;
