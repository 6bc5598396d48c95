use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// The variants are grouped by how a caller is expected to react: the
/// precondition family means the inputs were wrong, `Unresolved` means more
/// resolution or budget could fix it, and the rest name a specific
/// mathematical obstruction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value {value} has no dyadic exponent")]
    NoDyadicExponent { value: f64 },
    #[error("power of two 2^{exponent} leaves the floating-point range")]
    OutOfRange { exponent: i64 },
    #[error("construction exhausted; blocking residues {residues:?}")]
    ConstructionExhausted { residues: Vec<i64> },
    #[error("no stationary point in (1/2, 2)")]
    NoStationaryPoint,
    #[error("unresolved quadrature: estimate {estimate}, error {error}")]
    Unresolved { estimate: f64, error: f64 },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by caller input rather than numerics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::Domain(_)
                | Error::NoDyadicExponent { .. }
                | Error::OutOfRange { .. }
                | Error::Schema { .. }
                | Error::NoStationaryPoint
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
