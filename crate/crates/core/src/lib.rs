//! Incomplete Macdonald function `S_ν(z, t)` (the Shu function) and its
//! relatives: quadrature oracles, series and asymptotic evaluators, a
//! regime-switching front-end and residual checks of the recurrence,
//! differential and PDE identities.
//!
//! ```
//! use shu_core::{evaluate, validate, Tolerances};
//!
//! let p = validate(0.0, 3.0, 3.0).unwrap();
//! let (ev, decision) = evaluate(&p, &Tolerances::default()).unwrap();
//! assert!((ev.value - 0.031180758184859766).abs() < 1e-11);
//! println!("{} via {}", ev.value, decision.chosen);
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod evaluator;
pub mod expansions;
pub mod figures;
pub mod gamma;
pub mod params;
pub mod quadrature;
pub mod relations;
pub mod verify;

pub use closed_form::{erfcx, shu_half};
pub use error::{Field, Result, ShuError};
pub use evaluator::{
    evaluate, evaluate_grid, evaluate_grid_with, evaluate_with, EvaluatorConfig, GridCell, Reason,
    RegimeDecision, Rejection,
};
pub use expansions::{
    asympt_large_t, large_t_first_correction, leading_imb_large_z, leading_large_z, leading_small_t,
    leading_small_z, series_small_t, series_small_z,
};
pub use figures::{FigureData, FigureSpec};
pub use gamma::{
    exp_integral_e1, gamma, incomplete_gamma_asymptotic, macdonald_k, macdonald_k_eval, pochhammer,
    upper_incomplete_gamma, upper_incomplete_gamma_scaled, GammaOrder,
};
pub use params::{
    sgn, validate, Approximant, Evaluation, Flags, MethodTag, ShuParams, Tolerances, TruncatedSum,
};
pub use quadrature::{
    integrate_adaptive, shu_oracle, shu_oracle_cosh, shu_oracle_direct, QuadratureResult,
};
pub use relations::{
    d2s_dt2, diff_relation1_residual, diff_relation2_residual, ds_dt, ds_dz, gen_incomplete_gamma,
    incomplete_modified_bessel, leaky_aquifer, pde_residual, recurrence1_residual,
    recurrence2_residual, recurrence_sum_residual, shu_from_gen_incomplete_gamma,
    shu_from_leaky_aquifer, Identity, PdeMode, ResidualReport,
};
pub use verify::{run_verify, GridChoice, VerifyReport};
