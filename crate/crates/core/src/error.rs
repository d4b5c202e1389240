use thiserror::Error;

/// Errors raised by the numerical library.
///
/// Every variant carries the parameter set that produced it so that a failed
/// run can be reproduced from the message alone.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty spectrum: truncation K = {k} is below the smallest order nu = {nu_min}")]
    EmptySpectrum { k: f64, nu_min: f64 },

    #[error("unsupported cross-section for {operation}: {cross_section}")]
    UnsupportedCrossSection {
        operation: &'static str,
        cross_section: String,
    },

    #[error("aliasing: {samples} angular samples cannot resolve harmonic degree {degree} (need at least {required})")]
    Aliasing {
        samples: usize,
        degree: u32,
        required: usize,
    },

    #[error("quadrature failure ({context}): residual {residual:e} exceeds {threshold:e}")]
    Quadrature {
        context: String,
        residual: f64,
        threshold: f64,
    },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("time truncation did not converge ({context}): last values {previous:e} -> {last:e}")]
    Truncation {
        context: String,
        previous: f64,
        last: f64,
    },

    #[error("tail certification failed: {0}")]
    Tail(String),

    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("profile touches the cone tip: {0}")]
    TipSupport(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    Unknown {
        kind: &'static str,
        name: String,
        available: String,
    },
}

impl Error {
    /// True for failures of the numerics (quadrature, truncation, tails),
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Truncation { .. }
                | Error::Tail(_)
                | Error::Regime(_)
                | Error::Aliasing { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
