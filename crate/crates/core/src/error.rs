use thiserror::Error;

/// Parameter named by a [`ShuError::Domain`] rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Order,
    Argument,
    Endpoint,
    /// Second argument of an incomplete gamma function.
    GammaArgument,
    /// Endpoint of the incomplete modified Bessel integral.
    BesselEndpoint,
    /// Finite-difference order outside the supported set.
    DerivativeOrder,
    Tolerance,
    FigureId,
    /// Number of sweep points.
    Points,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Order => "order",
            Field::Argument => "argument",
            Field::Endpoint => "endpoint",
            Field::GammaArgument => "gamma_argument",
            Field::BesselEndpoint => "bessel_endpoint",
            Field::DerivativeOrder => "derivative_order",
            Field::Tolerance => "tolerance",
            Field::FigureId => "figure_id",
            Field::Points => "points",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShuError {
    #[error("domain error: {field} = {value} ({reason})")]
    Domain {
        field: Field,
        value: f64,
        reason: &'static str,
    },

    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("result overflows the double-precision range")]
    Overflow,

    /// An iteration or subdivision cap was hit; carries the best value found.
    #[error("no convergence: partial value {partial:e} with error estimate {error_estimate:e}")]
    NonConvergence { partial: f64, error_estimate: f64 },

    /// Richardson check of a finite-difference derivative disagreed.
    #[error("finite-difference step too coarse: h and h/2 estimates differ by {discrepancy:e} (relative)")]
    StepTooCoarse { discrepancy: f64 },
}

impl ShuError {
    pub(crate) fn domain(field: Field, value: f64, reason: &'static str) -> Self {
        ShuError::Domain {
            field,
            value,
            reason,
        }
    }
}

pub type Result<T> = std::result::Result<T, ShuError>;
