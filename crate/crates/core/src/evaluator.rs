//! Regime-switching front-end for `S_ν(z, t)`.
//!
//! Candidates are tried in a fixed order and the first one whose own error
//! estimate meets the tolerance wins; quadrature of the alternate integral
//! form is the universal fallback. Leading-term approximants are never
//! returned from here.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::shu_half;
use crate::error::Result;
use crate::expansions::{asympt_large_t, large_t_first_correction, series_small_t, series_small_z};
use crate::params::{validate, Evaluation, MethodTag, ShuParams, Tolerances};
use crate::quadrature::shu_oracle;

/// Regime thresholds. The defaults are calibration choices, not derived
/// bounds; every path is checked against its own error estimate anyway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluatorConfig {
    /// Minimum endpoint for the large-`t` expansion.
    pub large_t: f64,
    /// Minimum `z²/(4t)` for the small-`t` series.
    pub small_t_gamma_argument: f64,
    /// Maximum argument for the small-`z` series.
    pub small_z: f64,
    /// Use the erfc closed form at `ν = ±1/2`.
    pub closed_form_half: bool,
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig {
            large_t: 30.0,
            small_t_gamma_argument: 2.0,
            small_z: 1.0,
            closed_form_half: true,
        }
    }
}

/// Why a path was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    LargeT,
    HalfOrderClosedForm,
    SmallTConverged,
    SmallZConverged,
    FallbackOracle,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::LargeT => "LARGE_T",
            Reason::HalfOrderClosedForm => "HALF_ORDER_CLOSED_FORM",
            Reason::SmallTConverged => "SMALL_T_CONVERGED",
            Reason::SmallZConverged => "SMALL_Z_CONVERGED",
            Reason::FallbackOracle => "FALLBACK_ORACLE",
        }
    }
}

/// Why a candidate path was passed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rejection {
    /// Parameter point outside the path's regime threshold.
    OutsideRegime,
    /// Leading large-`t` correction still visible at the tolerance.
    CorrectionVisible,
    Disabled,
    ErrorAboveTarget,
    Cancellation,
    /// The path returned an error (non-convergence, overflow, …).
    Failed,
}

impl Rejection {
    pub fn as_str(self) -> &'static str {
        match self {
            Rejection::OutsideRegime => "OUTSIDE_REGIME",
            Rejection::CorrectionVisible => "CORRECTION_VISIBLE",
            Rejection::Disabled => "DISABLED",
            Rejection::ErrorAboveTarget => "ERROR_ABOVE_TARGET",
            Rejection::Cancellation => "CANCELLATION",
            Rejection::Failed => "FAILED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeDecision {
    pub chosen: MethodTag,
    pub reason: Reason,
    pub candidates_tried: Vec<(MethodTag, Rejection)>,
}

fn accept(ev: &Evaluation, tol: &Tolerances) -> std::result::Result<(), Rejection> {
    if ev.flags.cancellation {
        Err(Rejection::Cancellation)
    } else if !(ev.error_estimate <= tol.target(ev.value)) {
        Err(Rejection::ErrorAboveTarget)
    } else {
        Ok(())
    }
}

/// `S_ν(z, t)` with the default thresholds.
pub fn evaluate(p: &ShuParams, tol: &Tolerances) -> Result<(Evaluation, RegimeDecision)> {
    evaluate_with(p, tol, &EvaluatorConfig::default())
}

pub fn evaluate_with(
    p: &ShuParams,
    tol: &Tolerances,
    config: &EvaluatorConfig,
) -> Result<(Evaluation, RegimeDecision)> {
    tol.check()?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let mut tried = Vec::new();
    let decide = |ev: Evaluation, reason: Reason, tried: Vec<(MethodTag, Rejection)>| {
        let decision = RegimeDecision {
            chosen: ev.method,
            reason,
            candidates_tried: tried,
        };
        Ok((ev, decision))
    };

    // 1. Large endpoint: S is K_ν(z) minus an exponentially small correction.
    if t >= config.large_t {
        match asympt_large_t(p, tol) {
            Ok(ev) => {
                if large_t_first_correction(p) >= tol.target(ev.value) {
                    tried.push((MethodTag::AsymptLargeT, Rejection::CorrectionVisible));
                } else {
                    match accept(&ev, tol) {
                        Ok(()) => return decide(ev, Reason::LargeT, tried),
                        Err(r) => tried.push((MethodTag::AsymptLargeT, r)),
                    }
                }
            }
            Err(_) => tried.push((MethodTag::AsymptLargeT, Rejection::Failed)),
        }
    } else {
        tried.push((MethodTag::AsymptLargeT, Rejection::OutsideRegime));
    }

    // 2. Half-integer order: elementary closed form.
    if nu.abs() == 0.5 {
        if config.closed_form_half {
            match shu_half(p) {
                Ok(ev) => match accept(&ev, tol) {
                    Ok(()) => return decide(ev, Reason::HalfOrderClosedForm, tried),
                    Err(r) => tried.push((MethodTag::ClosedFormHalf, r)),
                },
                Err(_) => tried.push((MethodTag::ClosedFormHalf, Rejection::Failed)),
            }
        } else {
            tried.push((MethodTag::ClosedFormHalf, Rejection::Disabled));
        }
    } else {
        tried.push((MethodTag::ClosedFormHalf, Rejection::OutsideRegime));
    }

    // 3. Small endpoint relative to z²: incomplete-gamma series in t.
    if p.gamma_argument() >= config.small_t_gamma_argument {
        match series_small_t(p, tol) {
            Ok(ev) => match accept(&ev, tol) {
                Ok(()) => return decide(ev, Reason::SmallTConverged, tried),
                Err(r) => tried.push((MethodTag::SeriesSmallT, r)),
            },
            Err(_) => tried.push((MethodTag::SeriesSmallT, Rejection::Failed)),
        }
    } else {
        tried.push((MethodTag::SeriesSmallT, Rejection::OutsideRegime));
    }

    // 4. Small argument: K_ν(z) minus an incomplete-gamma series in z².
    if z <= config.small_z {
        match series_small_z(p, tol) {
            Ok(ev) => match accept(&ev, tol) {
                Ok(()) => return decide(ev, Reason::SmallZConverged, tried),
                Err(r) => tried.push((MethodTag::SeriesSmallZ, r)),
            },
            Err(_) => tried.push((MethodTag::SeriesSmallZ, Rejection::Failed)),
        }
    } else {
        tried.push((MethodTag::SeriesSmallZ, Rejection::OutsideRegime));
    }

    // 5. Quadrature.
    let ev = shu_oracle(p, tol)?;
    decide(ev, Reason::FallbackOracle, tried)
}

/// One cell of a grid sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub order: f64,
    pub argument: f64,
    pub endpoint: f64,
    pub result: Result<Evaluation>,
}

/// Evaluates the Cartesian product `orders × zs × ts` in row-major order
/// (endpoint varies fastest). Cells are independent and computed in
/// parallel; a failing cell carries its error and does not stop the sweep.
pub fn evaluate_grid(orders: &[f64], zs: &[f64], ts: &[f64], tol: &Tolerances) -> Vec<GridCell> {
    evaluate_grid_with(orders, zs, ts, tol, &EvaluatorConfig::default())
}

pub fn evaluate_grid_with(
    orders: &[f64],
    zs: &[f64],
    ts: &[f64],
    tol: &Tolerances,
    config: &EvaluatorConfig,
) -> Vec<GridCell> {
    let points: Vec<(f64, f64, f64)> = orders
        .iter()
        .flat_map(|&nu| zs.iter().flat_map(move |&z| ts.iter().map(move |&t| (nu, z, t))))
        .collect();
    points
        .into_par_iter()
        .map(|(order, argument, endpoint)| GridCell {
            order,
            argument,
            endpoint,
            result: validate(order, argument, endpoint)
                .and_then(|p| evaluate_with(&p, tol, config))
                .map(|(ev, _)| ev),
        })
        .collect()
}
