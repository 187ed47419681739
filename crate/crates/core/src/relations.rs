//! Derivatives, identity residuals and conversions to related functions.
//!
//! Each residual is "left minus right" of an identity satisfied by `S_ν`,
//! with every `S` value taken from the quadrature oracle at 1e-13 relative
//! tolerance. To keep a faulty `∂S/∂z` formula from certifying itself, the
//! second recurrence and the finite-difference PDE check differentiate the
//! oracle numerically instead of using [`ds_dz`].

use serde::Serialize;

use crate::error::{Field, Result, ShuError};
use crate::evaluator::evaluate;
use crate::params::{validate, ShuParams, Tolerances};
use crate::quadrature::shu_oracle;

/// Oracle tolerance used inside every residual.
fn oracle_tol() -> Tolerances {
    Tolerances::relative(1e-13)
}

/// `S_ν(z, t)` by the quadrature oracle at tight tolerance.
fn s(nu: f64, z: f64, t: f64) -> Result<f64> {
    let p = validate(nu, z, t)?;
    Ok(shu_oracle(&p, &oracle_tol())?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Identity {
    /// `−(2ν/z) S_ν = ∂_t S_{ν−1} + S_{ν−1} − S_{ν+1}`
    Rec1,
    /// `−2 ∂_z S_ν = ∂_t S_{ν−1} + S_{ν−1} + S_{ν+1}`
    Rec2,
    /// Sum of the two recurrences:
    /// `−∂_z S_ν − (ν/z) S_ν = S_{ν−1} + ∂_t S_{ν−1}`
    RecSum,
    /// `(z⁻¹∂_z)^k (z^ν S_ν) = (−1)^k (1 + ∂_t)^k (z^{ν−k} S_{ν−k})`
    Diff1,
    /// `(z⁻¹∂_z)^k (z^{−ν} S_ν) = (−1)^k z^{−ν−k} S_{ν+k}`
    Diff2,
    /// `z² ∂²_z S + z ∂_z S − (z² + ν²) S − z² ∂_t S = 0`, derivatives from
    /// the order-shift ladder.
    PdeExact,
    /// The same PDE with `z`-derivatives by finite differences.
    PdeFiniteDifference,
}

impl Identity {
    pub fn as_str(self) -> &'static str {
        match self {
            Identity::Rec1 => "Rec1",
            Identity::Rec2 => "Rec2",
            Identity::RecSum => "RecSum",
            Identity::Diff1 => "Diff1",
            Identity::Diff2 => "Diff2",
            Identity::PdeExact => "PDE-Exact",
            Identity::PdeFiniteDifference => "PDE-FD",
        }
    }
}

impl std::fmt::Display for Identity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Residual of one identity at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub identity: Identity,
    pub point: ShuParams,
    /// Derivative order for `Diff1`/`Diff2`.
    pub k: Option<u32>,
    pub residual: f64,
    /// Largest additive term magnitude; always positive.
    pub scale: f64,
    pub relative_residual: f64,
}

impl ResidualReport {
    fn new(identity: Identity, point: ShuParams, k: Option<u32>, terms: &[f64]) -> Self {
        let residual: f64 = terms.iter().sum();
        let scale = terms
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        ResidualReport {
            identity,
            point,
            k,
            residual,
            scale,
            relative_residual: residual.abs() / scale,
        }
    }

    fn two_sided(identity: Identity, point: ShuParams, k: Option<u32>, left: f64, right: f64) -> Self {
        let scale = left.abs().max(right.abs()).max(f64::MIN_POSITIVE);
        let residual = left - right;
        ResidualReport {
            identity,
            point,
            k,
            residual,
            scale,
            relative_residual: residual.abs() / scale,
        }
    }
}

/// `∂S_ν/∂t = ½ (z/2)^ν e^{−t − z²/4t} t^{−ν−1}`, exact. Returns 0 when
/// the value is below the normal range.
pub fn ds_dt(p: &ShuParams) -> f64 {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let log_v = -std::f64::consts::LN_2 + nu * (0.5 * z).ln() - t - p.gamma_argument()
        - (nu + 1.0) * t.ln();
    if log_v < f64::MIN_POSITIVE.ln() {
        0.0
    } else {
        log_v.exp()
    }
}

/// `∂²S_ν/∂t² = ∂_t S_ν · (−1 + z²/(4t²) − (ν+1)/t)`.
pub fn d2s_dt2(p: &ShuParams) -> f64 {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    ds_dt(p) * (-1.0 + z * z / (4.0 * t * t) - (nu + 1.0) / t)
}

fn ds_dt_at(nu: f64, z: f64, t: f64) -> Result<f64> {
    Ok(ds_dt(&validate(nu, z, t)?))
}

/// `∂S_ν/∂z = (ν/z) S_ν − S_{ν+1}`, from two oracle values.
pub fn ds_dz(p: &ShuParams) -> Result<f64> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    Ok(nu / z * s(nu, z, t)? - s(nu + 1.0, z, t)?)
}

/// Richardson extrapolation `(4 D(h/2) − D(h))/3` of a second-order
/// difference quotient `D`.
fn extrapolate(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Derivative from central differences with steps `h`, `h/2` and `h/4`.
///
/// The two Richardson-extrapolated estimates (from `h, h/2` and from
/// `h/2, h/4`) must agree to `limit` relative, otherwise the step is too
/// coarse for the local variation of `f` and `StepTooCoarse` is returned.
pub fn central_difference<F>(f: F, x: f64, h: f64, limit: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let (d1, d2, d4) = (d(h)?, d(0.5 * h)?, d(0.25 * h)?);
    checked(extrapolate(d1, d2), extrapolate(d2, d4), limit)
}

/// Second derivative from `(f(x+h) − 2f(x) + f(x−h))/h²`, extrapolated
/// and checked as in [`central_difference`].
pub fn second_difference<F>(f: F, x: f64, h: f64, limit: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let f0 = f(x)?;
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - 2.0 * f0 + f(x - h)?) / (h * h)) };
    let (d1, d2, d4) = (d(h)?, d(0.5 * h)?, d(0.25 * h)?);
    checked(extrapolate(d1, d2), extrapolate(d2, d4), limit)
}

fn checked(coarse: f64, fine: f64, limit: f64) -> Result<f64> {
    let discrepancy = (coarse - fine).abs() / coarse.abs().max(fine.abs()).max(f64::MIN_POSITIVE);
    if discrepancy > limit {
        return Err(ShuError::StepTooCoarse { discrepancy });
    }
    Ok(fine)
}

/// Relative step for first `z`-derivatives.
const H_FIRST: f64 = 1e-5;
/// Relative step for second `z`-derivatives.
const H_SECOND: f64 = 1e-3;
/// Richardson acceptance: ten times the identity tolerance.
const LIMIT_FIRST: f64 = 1e-5;
const LIMIT_SECOND: f64 = 1e-3;

pub fn recurrence1_residual(p: &ShuParams) -> Result<ResidualReport> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let terms = [
        ds_dt_at(nu - 1.0, z, t)?,
        s(nu - 1.0, z, t)?,
        -s(nu + 1.0, z, t)?,
        2.0 * nu / z * s(nu, z, t)?,
    ];
    Ok(ResidualReport::new(Identity::Rec1, *p, None, &terms))
}

/// `∂S_ν/∂z` by a Richardson-checked central difference of the oracle.
fn ds_dz_fd(nu: f64, z: f64, t: f64) -> Result<f64> {
    central_difference(|zz| s(nu, zz, t), z, H_FIRST * z, LIMIT_FIRST)
}

pub fn recurrence2_residual(p: &ShuParams) -> Result<ResidualReport> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let terms = [
        ds_dt_at(nu - 1.0, z, t)?,
        s(nu - 1.0, z, t)?,
        s(nu + 1.0, z, t)?,
        2.0 * ds_dz_fd(nu, z, t)?,
    ];
    Ok(ResidualReport::new(Identity::Rec2, *p, None, &terms))
}

/// The two recurrences added: `−∂_z S_ν − (ν/z) S_ν − S_{ν−1} − ∂_t S_{ν−1}`,
/// with the `z`-derivative taken numerically.
pub fn recurrence_sum_residual(p: &ShuParams) -> Result<ResidualReport> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let terms = [
        -ds_dz_fd(nu, z, t)?,
        -nu / z * s(nu, z, t)?,
        -s(nu - 1.0, z, t)?,
        -ds_dt_at(nu - 1.0, z, t)?,
    ];
    Ok(ResidualReport::new(Identity::RecSum, *p, None, &terms))
}

fn check_k(k: u32) -> Result<()> {
    if k > 2 {
        return Err(ShuError::domain(Field::DerivativeOrder, f64::from(k), "must be 0, 1 or 2"));
    }
    Ok(())
}

/// `(z⁻¹ d/dz)^k F` at `z` by nested central differences with relative
/// step `1e-4` (k = 1) or `1e-3` (k = 2).
fn z_operator<F>(f: &F, z: f64, k: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    match k {
        0 => f(z),
        1 => Ok(central_difference(f, z, 1e-4 * z, LIMIT_FIRST)? / z),
        _ => {
            let h = H_SECOND * z;
            let inner = |x: f64| -> Result<f64> {
                let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
                Ok(extrapolate(d(h)?, d(0.5 * h)?) / x)
            };
            Ok(central_difference(inner, z, h, LIMIT_SECOND)? / z)
        }
    }
}

/// `(z⁻¹∂_z)^k (z^ν S_ν)` against `(−1)^k (1 + ∂_t)^k (z^{ν−k} S_{ν−k})`.
pub fn diff_relation1_residual(p: &ShuParams, k: u32) -> Result<ResidualReport> {
    check_k(k)?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let f = |zz: f64| -> Result<f64> { Ok(zz.powf(nu) * s(nu, zz, t)?) };
    let left = z_operator(&f, z, k)?;
    let m = nu - f64::from(k);
    let q = validate(m, z, t)?;
    let sm = s(m, z, t)?;
    let bracket = match k {
        0 => sm,
        1 => sm + ds_dt(&q),
        _ => sm + 2.0 * ds_dt(&q) + d2s_dt2(&q),
    };
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let right = sign * z.powf(m) * bracket;
    Ok(ResidualReport::two_sided(Identity::Diff1, *p, Some(k), left, right))
}

/// `(z⁻¹∂_z)^k (S_ν / z^ν)` against `(−1)^k S_{ν+k} / z^{ν+k}`.
pub fn diff_relation2_residual(p: &ShuParams, k: u32) -> Result<ResidualReport> {
    check_k(k)?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let f = |zz: f64| -> Result<f64> { Ok(s(nu, zz, t)? / zz.powf(nu)) };
    let left = z_operator(&f, z, k)?;
    let m = nu + f64::from(k);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let right = sign * s(m, z, t)? / z.powf(m);
    Ok(ResidualReport::two_sided(Identity::Diff2, *p, Some(k), left, right))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PdeMode {
    Exact,
    FiniteDifference,
}

/// Residual of `z² ∂²_z S + z ∂_z S − (z² + ν²) S − z² ∂_t S = 0`.
pub fn pde_residual(p: &ShuParams, mode: PdeMode) -> Result<ResidualReport> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let s0 = s(nu, z, t)?;
    let (sz, szz, identity) = match mode {
        PdeMode::Exact => {
            let s1 = s(nu + 1.0, z, t)?;
            let s2 = s(nu + 2.0, z, t)?;
            let sz = nu / z * s0 - s1;
            let s1z = (nu + 1.0) / z * s1 - s2;
            let szz = -nu / (z * z) * s0 + nu / z * sz - s1z;
            (sz, szz, Identity::PdeExact)
        }
        PdeMode::FiniteDifference => {
            let f = |zz: f64| s(nu, zz, t);
            let sz = central_difference(f, z, H_FIRST * z, LIMIT_FIRST)?;
            let szz = second_difference(f, z, H_SECOND * z, 1e-4)?;
            (sz, szz, Identity::PdeFiniteDifference)
        }
    };
    let terms = [z * z * szz, z * sz, -(z * z + nu * nu) * s0, -z * z * ds_dt(p)];
    Ok(ResidualReport::new(identity, *p, None, &terms))
}

/// Generalised incomplete gamma function
/// `Γ(a, t; z) = ∫_t^∞ τ^{a−1} e^{−τ − z/τ} dτ = 2 z^{a/2} S_a(2√z, z/t)`.
pub fn gen_incomplete_gamma(a: f64, t_g: f64, z_g: f64, tol: &Tolerances) -> Result<f64> {
    if !(t_g > 0.0) || !t_g.is_finite() {
        return Err(ShuError::domain(Field::Endpoint, t_g, "must be finite and > 0"));
    }
    if !(z_g > 0.0) || !z_g.is_finite() {
        return Err(ShuError::domain(Field::Argument, z_g, "must be finite and > 0"));
    }
    let p = validate(a, 2.0 * z_g.sqrt(), z_g / t_g)?;
    let (ev, _) = evaluate(&p, tol)?;
    Ok(scale_log(std::f64::consts::LN_2 + 0.5 * a * z_g.ln(), ev.value))
}

/// `exp(log_factor) · v` without intermediate overflow.
fn scale_log(log_factor: f64, v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    v.signum() * (log_factor + v.abs().ln()).exp()
}

/// `S_ν(z, t) = ½ (2/z)^ν Γ(ν, z²/4t; z²/4)`.
pub fn shu_from_gen_incomplete_gamma(p: &ShuParams, tol: &Tolerances) -> Result<f64> {
    let (nu, z) = (p.order(), p.argument());
    let g = gen_incomplete_gamma(nu, p.gamma_argument(), 0.25 * z * z, tol)?;
    Ok(scale_log(-std::f64::consts::LN_2 + nu * (2.0 / z).ln(), g))
}

/// Leaky aquifer function
/// `L_a(z, t) = ∫_1^∞ e^{−zτ − t/τ} τ^{−a−1} dτ = 2 (z/t)^{a/2} S_{−a}(2√(zt), t)`.
pub fn leaky_aquifer(a: f64, z_l: f64, t_l: f64, tol: &Tolerances) -> Result<f64> {
    if !(z_l > 0.0) || !z_l.is_finite() {
        return Err(ShuError::domain(Field::Argument, z_l, "must be finite and > 0"));
    }
    if !(t_l > 0.0) || !t_l.is_finite() {
        return Err(ShuError::domain(Field::Endpoint, t_l, "must be finite and > 0"));
    }
    let p = validate(-a, 2.0 * (z_l * t_l).sqrt(), t_l)?;
    let (ev, _) = evaluate(&p, tol)?;
    Ok(scale_log(std::f64::consts::LN_2 + 0.5 * a * (z_l / t_l).ln(), ev.value))
}

/// `S_ν(z, t) = ½ (z/2t)^ν L_{−ν}(z²/4t, t)`.
pub fn shu_from_leaky_aquifer(p: &ShuParams, tol: &Tolerances) -> Result<f64> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let l = leaky_aquifer(-nu, p.gamma_argument(), t, tol)?;
    Ok(scale_log(-std::f64::consts::LN_2 + nu * (0.5 * z / t).ln(), l))
}

/// Incomplete modified Bessel function
/// `½ ∫_t^∞ e^{−z cosh τ} cosh(aτ) dτ = ½ (S_a + S_{−a})(z, z e^{−t}/2)`.
pub fn incomplete_modified_bessel(a: f64, z: f64, t_imb: f64, tol: &Tolerances) -> Result<f64> {
    if !(t_imb > 0.0) || !t_imb.is_finite() {
        return Err(ShuError::domain(Field::BesselEndpoint, t_imb, "must be finite and > 0"));
    }
    let p = validate(a, z, 0.5 * z * (-t_imb).exp())?;
    let plus = evaluate(&p, tol)?.0.value;
    let minus = evaluate(&p.with_order(-a)?, tol)?.0.value;
    Ok(0.5 * (plus + minus))
}
