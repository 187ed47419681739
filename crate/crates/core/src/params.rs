//! Domain types shared by every evaluator: the parameter triple, numeric
//! tolerances, method tags and the evaluation record.

use serde::Serialize;

use crate::error::{Field, Result, ShuError};

/// Natural-log bound below which `exp` underflows in double precision.
pub const LN_UNDERFLOW: f64 = 745.0;

/// Order ν, argument z and endpoint t of `S_ν(z, t)`.
///
/// Constructed only through [`validate`], so `argument > 0`, `endpoint > 0`
/// and all three fields are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShuParams {
    order: f64,
    argument: f64,
    endpoint: f64,
}

impl ShuParams {
    pub fn new(order: f64, argument: f64, endpoint: f64) -> Result<Self> {
        validate(order, argument, endpoint)
    }

    #[inline]
    pub fn order(&self) -> f64 {
        self.order
    }

    #[inline]
    pub fn argument(&self) -> f64 {
        self.argument
    }

    #[inline]
    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }

    /// Same point with the order replaced.
    pub fn with_order(&self, order: f64) -> Result<Self> {
        validate(order, self.argument, self.endpoint)
    }

    pub fn with_argument(&self, argument: f64) -> Result<Self> {
        validate(self.order, argument, self.endpoint)
    }

    pub fn with_endpoint(&self, endpoint: f64) -> Result<Self> {
        validate(self.order, self.argument, endpoint)
    }

    /// Lower limit `z²/(4t)` of the alternate integral form.
    #[inline]
    pub fn gamma_argument(&self) -> f64 {
        self.argument * self.argument / (4.0 * self.endpoint)
    }
}

/// Checks the domain `z > 0`, `t > 0`, all finite.
pub fn validate(order: f64, argument: f64, endpoint: f64) -> Result<ShuParams> {
    if !order.is_finite() {
        return Err(ShuError::domain(Field::Order, order, "must be finite"));
    }
    if !argument.is_finite() {
        return Err(ShuError::domain(Field::Argument, argument, "must be finite"));
    }
    if argument <= 0.0 {
        return Err(ShuError::domain(Field::Argument, argument, "must be > 0"));
    }
    if !endpoint.is_finite() {
        return Err(ShuError::domain(Field::Endpoint, endpoint, "must be finite"));
    }
    if endpoint <= 0.0 {
        return Err(ShuError::domain(Field::Endpoint, endpoint, "must be > 0"));
    }
    Ok(ShuParams {
        order,
        argument,
        endpoint,
    })
}

/// Signum with `sgn(0) = 0`.
pub fn sgn(y: f64) -> i32 {
    if y > 0.0 {
        1
    } else if y < 0.0 {
        -1
    } else {
        0
    }
}

/// Accuracy targets and work caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on summed series terms.
    pub max_terms: usize,
    /// Cap on quadrature bisection depth.
    pub max_depth: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_terms: 200,
            max_depth: 60,
        }
    }
}

impl Tolerances {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize, max_depth: usize) -> Result<Self> {
        let tol = Tolerances {
            abs_tol,
            rel_tol,
            max_terms,
            max_depth,
        };
        tol.check()?;
        Ok(tol)
    }

    /// Purely relative tolerance with default caps.
    pub fn relative(rel_tol: f64) -> Self {
        Tolerances {
            abs_tol: 0.0,
            rel_tol,
            ..Tolerances::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok_abs = self.abs_tol.is_finite() && self.abs_tol >= 0.0;
        let ok_rel = self.rel_tol.is_finite() && self.rel_tol >= 0.0;
        if !ok_abs {
            return Err(ShuError::domain(Field::Tolerance, self.abs_tol, "abs_tol must be finite and >= 0"));
        }
        if !ok_rel {
            return Err(ShuError::domain(Field::Tolerance, self.rel_tol, "rel_tol must be finite and >= 0"));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(ShuError::domain(Field::Tolerance, 0.0, "abs_tol or rel_tol must be > 0"));
        }
        if self.max_terms == 0 || self.max_depth == 0 {
            return Err(ShuError::domain(Field::Tolerance, 0.0, "caps must be positive"));
        }
        Ok(())
    }

    /// Absolute error target for a result of magnitude `value`.
    #[inline]
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Which evaluator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MethodTag {
    /// Quadrature of the defining integral on `(0, t]`.
    Oracle2,
    /// Quadrature of the cosh form.
    Oracle4,
    /// Quadrature of the alternate form on `[z²/4t, ∞)`.
    Oracle5,
    SeriesSmallT,
    SeriesSmallZ,
    AsymptLargeT,
    LeadingSmallT,
    LeadingSmallZ,
    LeadingLargeT,
    LeadingLargeZ,
    ClosedFormHalf,
}

impl MethodTag {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::Oracle2 => "Oracle2",
            MethodTag::Oracle4 => "Oracle4",
            MethodTag::Oracle5 => "Oracle5",
            MethodTag::SeriesSmallT => "SeriesSmallT",
            MethodTag::SeriesSmallZ => "SeriesSmallZ",
            MethodTag::AsymptLargeT => "AsymptLargeT",
            MethodTag::LeadingSmallT => "LeadingSmallT",
            MethodTag::LeadingSmallZ => "LeadingSmallZ",
            MethodTag::LeadingLargeT => "LeadingLargeT",
            MethodTag::LeadingLargeZ => "LeadingLargeZ",
            MethodTag::ClosedFormHalf => "ClosedFormHalf",
        }
    }

    /// Leading-term approximants carry no error control.
    pub fn is_approximant(self) -> bool {
        matches!(
            self,
            MethodTag::LeadingSmallT
                | MethodTag::LeadingSmallZ
                | MethodTag::LeadingLargeT
                | MethodTag::LeadingLargeZ
        )
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-fatal conditions attached to a result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// True value is below the smallest normal double; reported as 0.
    pub underflow: bool,
    /// Summed terms exceed the result by more than six orders of magnitude.
    pub cancellation: bool,
    /// Large-z approximant evaluated with `z < 2.5 t`.
    pub near_pole: bool,
}

/// A computed value of `S_ν(z, t)` (or a relative) with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Absolute error estimate, never negative.
    pub error_estimate: f64,
    pub method: MethodTag,
    /// Terms summed or quadrature panels used.
    pub work: usize,
    pub flags: Flags,
}

impl Evaluation {
    pub(crate) fn new(value: f64, error_estimate: f64, method: MethodTag, work: usize) -> Self {
        Evaluation {
            value,
            error_estimate: error_estimate.abs(),
            method,
            work,
            flags: Flags::default(),
        }
    }

    pub(crate) fn underflow(method: MethodTag, work: usize) -> Self {
        Evaluation {
            value: 0.0,
            error_estimate: f64::MIN_POSITIVE,
            method,
            work,
            flags: Flags {
                underflow: true,
                ..Flags::default()
            },
        }
    }

    /// Error estimate relative to the value (infinite for a zero value).
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.error_estimate / self.value.abs()
        }
    }
}

/// A truncated series: value, how much was summed and what was left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedSum {
    pub value: f64,
    pub terms_used: usize,
    /// Magnitude of the final included term.
    pub last_term: f64,
    /// Estimate of the omitted remainder, never negative.
    pub tail_bound: f64,
}

/// Value of a leading-term approximant; no error control by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approximant {
    pub value: f64,
    pub method: MethodTag,
    pub flags: Flags,
}
