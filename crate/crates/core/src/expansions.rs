//! Series and asymptotic representations of `S_ν(z, t)`.
//!
//! The two convergent series and the large-`t` expansion are evaluators with
//! error estimates. The leading-term forms are approximants: they return an
//! [`Approximant`] and never carry an error estimate.
//!
//! All sums are evaluated with their common prefactor factored out and kept
//! in log space, so very small values (e.g. `S` at tiny `t`) are computed
//! with full relative accuracy instead of underflowing term by term.

use crate::error::{Field, Result, ShuError};
use crate::gamma::{asymptotic_inner, gamma, macdonald_k_eval, upper_incomplete_gamma_scaled};
use crate::params::{
    sgn, Approximant, Evaluation, Flags, MethodTag, ShuParams, Tolerances, TruncatedSum,
};

const LN_2: f64 = std::f64::consts::LN_2;

/// Ratio of the largest summed magnitude to the result above which the
/// result is flagged as cancellation-dominated.
const CANCELLATION_RATIO: f64 = 1e6;

/// A convergent alternating-type sum `Σ_k term(k)` stopped after two
/// consecutive terms below the target.
struct Summed {
    sum: TruncatedSum,
    /// Largest term magnitude, for rounding and cancellation estimates.
    largest: f64,
    /// `Σ |term|`.
    absolute: f64,
}

fn sum_convergent<F>(mut term: F, abs_tol: f64, tol: &Tolerances) -> Result<Summed>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    let mut absolute = 0.0;
    let mut small_run = 0;
    let mut last = 0.0;
    for k in 0..tol.max_terms {
        let t = term(k)?;
        if !t.is_finite() {
            return Err(ShuError::Overflow);
        }
        sum += t;
        absolute += t.abs();
        largest = largest.max(t.abs());
        last = t;
        let target = abs_tol.max(tol.rel_tol * sum.abs()).max(f64::EPSILON * sum.abs());
        if t.abs() < target {
            small_run += 1;
            if small_run == 2 {
                return Ok(Summed {
                    sum: TruncatedSum {
                        value: sum,
                        terms_used: k + 1,
                        last_term: t.abs(),
                        tail_bound: t.abs(),
                    },
                    largest,
                    absolute,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(ShuError::NonConvergence {
        partial: sum,
        error_estimate: last.abs(),
    })
}

/// `abs_tol` expressed in units of `exp(log_pref)`.
fn scaled_abs_tol(tol: &Tolerances, log_pref: f64) -> f64 {
    let v = tol.abs_tol * (-log_pref).exp();
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

/// Multiplies a scaled sum back by `exp(log_pref)`, applying the underflow
/// policy. Returns `(value, scale)` where `scale = exp(log_pref)`.
fn rescale(log_pref: f64, scaled: f64) -> Result<Option<(f64, f64)>> {
    if scaled == 0.0 {
        return Ok(None);
    }
    let log_value = log_pref + scaled.abs().ln();
    if log_value < f64::MIN_POSITIVE.ln() {
        return Ok(None);
    }
    if log_value > f64::MAX.ln() {
        return Err(ShuError::Overflow);
    }
    let value = scaled.signum() * log_value.exp();
    Ok(Some((value, value / scaled)))
}

/// Small-endpoint series
/// `S = ½ Σ_k (−1)^k/k! (2/z)^{ν−2k} Γ(ν−k, z²/4t)` (tag `SeriesSmallT`).
///
/// Convergent for every `t`; each term carries `t^k/k!`, so it is fastest
/// when `t` is small. Evaluated as
/// `½ (z/2)^ν t^{−ν} e^{−x} Σ_k (−t)^k/k! · G(ν−k, x)` with `x = z²/4t` and
/// `G(a, x) = Γ(a, x) e^x x^{−a}`.
pub fn series_small_t(p: &ShuParams, tol: &Tolerances) -> Result<Evaluation> {
    tol.check()?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let x = p.gamma_argument();
    let log_pref = -LN_2 + nu * (0.5 * z).ln() - nu * t.ln() - x;

    let mut coef = 1.0;
    let summed = sum_convergent(
        |k| {
            if k > 0 {
                coef *= -t / k as f64;
            }
            Ok(coef * upper_incomplete_gamma_scaled(nu - k as f64, x)?)
        },
        scaled_abs_tol(tol, log_pref),
        tol,
    )?;
    finish_sum(summed, log_pref, 1.0 + x.abs() + nu.abs() * t.ln().abs(), MethodTag::SeriesSmallT)
}

fn finish_sum(summed: Summed, log_pref: f64, log_size: f64, method: MethodTag) -> Result<Evaluation> {
    let work = summed.sum.terms_used;
    let Some((value, scale)) = rescale(log_pref, summed.sum.value)? else {
        return Ok(Evaluation::underflow(method, work));
    };
    let err = scale.abs() * (summed.sum.tail_bound + 8.0 * f64::EPSILON * summed.absolute)
        + 4.0 * f64::EPSILON * log_size * value.abs();
    let mut ev = Evaluation::new(value, err, method, work);
    ev.flags.cancellation = summed.largest > CANCELLATION_RATIO * summed.sum.value.abs();
    Ok(ev)
}

/// Leading small-endpoint term `½ (z/2)^{ν−2} e^{−z²/4t} t^{1−ν}`
/// (tag `LeadingSmallT`).
pub fn leading_small_t(p: &ShuParams) -> Approximant {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let log_value = -LN_2 + (nu - 2.0) * (0.5 * z).ln() - p.gamma_argument() + (1.0 - nu) * t.ln();
    approximant_from_log(log_value, MethodTag::LeadingSmallT)
}

fn approximant_from_log(log_value: f64, method: MethodTag) -> Approximant {
    let mut flags = Flags::default();
    let value = if log_value < f64::MIN_POSITIVE.ln() {
        flags.underflow = true;
        0.0
    } else {
        log_value.exp()
    };
    Approximant {
        value,
        method,
        flags,
    }
}

/// Small-argument series
/// `S = K_ν(z) − ½ Σ_k (−1)^k/k! (z/2)^{ν+2k} Γ(−ν−k, t)` (tag `SeriesSmallZ`).
///
/// The sum is convergent for all `z` but subtracts from `K_ν(z)`; when `t`
/// is small the two nearly cancel and the result is flagged.
pub fn series_small_z(p: &ShuParams, tol: &Tolerances) -> Result<Evaluation> {
    tol.check()?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let x = p.gamma_argument();
    let k_eval = macdonald_k_eval(nu, z, tol)?;
    // ½ e^{−t} (z/2t)^ν Σ_k (−x)^k/k! G(−ν−k, t)
    let log_pref = -LN_2 - t + nu * (0.5 * z / t).ln();
    let mut coef = 1.0;
    let summed = sum_convergent(
        |k| {
            if k > 0 {
                coef *= -x / k as f64;
            }
            Ok(coef * upper_incomplete_gamma_scaled(-nu - k as f64, t)?)
        },
        scaled_abs_tol(tol, log_pref),
        tol,
    )?;
    let work = summed.sum.terms_used + k_eval.work;
    let correction = match rescale(log_pref, summed.sum.value)? {
        Some((v, _)) => v,
        None => 0.0,
    };
    let scale = log_pref.exp();
    let value = k_eval.value - correction;
    let err = k_eval.error_estimate
        + scale * (summed.sum.tail_bound + 8.0 * f64::EPSILON * summed.absolute)
        + 4.0 * f64::EPSILON * (1.0 + log_pref.abs()) * correction.abs()
        + 2.0 * f64::EPSILON * k_eval.value.abs();
    let mut ev = Evaluation::new(value, err, MethodTag::SeriesSmallZ, work);
    let largest = (scale * summed.largest).max(correction.abs()).max(k_eval.value);
    ev.flags.cancellation = largest > CANCELLATION_RATIO * value.abs();
    Ok(ev)
}

/// Leading small-argument term: `−ln z` for `ν = 0`, otherwise
/// `2^{|ν|−1} Γ(|ν|) z^{−|ν|}` (tag `LeadingSmallZ`).
pub fn leading_small_z(p: &ShuParams) -> Result<Approximant> {
    let (nu, z) = (p.order(), p.argument());
    if nu == 0.0 {
        return Ok(Approximant {
            value: -z.ln(),
            method: MethodTag::LeadingSmallZ,
            flags: Flags::default(),
        });
    }
    let a = nu * f64::from(sgn(nu));
    let value = 2f64.powf(a - 1.0) * gamma(a)? / z.powf(a);
    if !value.is_finite() {
        return Err(ShuError::Overflow);
    }
    Ok(Approximant {
        value,
        method: MethodTag::LeadingSmallZ,
        flags: Flags::default(),
    })
}

/// Large-endpoint expansion (tag `AsymptLargeT`):
///
/// `S = K_ν(z) − ½ e^{−t} Σ_k (−1)^k/k! (z/2)^{ν+2k} t^{−ν−k−1}
///       Σ_m (−1)^m (ν+k+1)_m t^{−m}`.
///
/// The inner sum is asymptotic in `1/t` and is cut at its smallest term;
/// the outer sum converges and stops on two consecutive small terms.
/// The returned tail bound is the largest first-omitted inner term.
pub fn asympt_large_t(p: &ShuParams, tol: &Tolerances) -> Result<Evaluation> {
    let (ev, _) = asympt_large_t_detail(p, tol)?;
    Ok(ev)
}

/// As [`asympt_large_t`], also returning the correction sum.
pub fn asympt_large_t_detail(p: &ShuParams, tol: &Tolerances) -> Result<(Evaluation, TruncatedSum)> {
    tol.check()?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let x = p.gamma_argument();
    let k_eval = macdonald_k_eval(nu, z, tol)?;
    let log_pref = -LN_2 - t + nu * (0.5 * z).ln() - (nu + 1.0) * t.ln();
    let scale = log_pref.exp();

    let mut coef = 1.0;
    let mut inner_tail: f64 = 0.0;
    let mut inner_tail_sum = 0.0;
    let mut inner_terms = 0;
    let summed = sum_convergent(
        |k| {
            if k > 0 {
                coef *= -x / k as f64;
            }
            let inner = asymptotic_inner(nu + k as f64 + 1.0, t, tol.max_terms);
            if inner.terms_used > tol.max_terms && inner.tail_bound > f64::EPSILON * inner.value.abs() {
                return Err(ShuError::NonConvergence {
                    partial: inner.value,
                    error_estimate: inner.tail_bound,
                });
            }
            inner_tail = inner_tail.max((coef * inner.tail_bound).abs());
            inner_tail_sum += (coef * inner.tail_bound).abs();
            inner_terms += inner.terms_used;
            Ok(coef * inner.value)
        },
        scaled_abs_tol(tol, log_pref),
        tol,
    )?;
    let correction = scale * summed.sum.value;
    let value = k_eval.value - correction;
    let tail = scale * (summed.sum.tail_bound + inner_tail);
    // Each retained k contributes its own truncation error.
    let err = k_eval.error_estimate
        + scale * (summed.sum.tail_bound + inner_tail_sum)
        + scale * 8.0 * f64::EPSILON * summed.absolute
        + 4.0 * f64::EPSILON * (1.0 + log_pref.abs()) * correction.abs()
        + 2.0 * f64::EPSILON * k_eval.value.abs();
    let work = k_eval.work + inner_terms;
    let mut ev = Evaluation::new(value, err, MethodTag::AsymptLargeT, work);
    ev.flags.cancellation = correction.abs() > CANCELLATION_RATIO * value.abs();
    let sum = TruncatedSum {
        value: correction,
        terms_used: summed.sum.terms_used,
        last_term: scale * summed.sum.last_term,
        tail_bound: tail,
    };
    Ok((ev, sum))
}

/// Magnitude of the leading (m = k = 0) large-endpoint correction
/// `½ (z/2)^ν e^{−t} t^{−ν−1}`.
pub fn large_t_first_correction(p: &ShuParams) -> f64 {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    (-LN_2 - t + nu * (0.5 * z).ln() - (nu + 1.0) * t.ln()).exp()
}

/// Leading large-argument term
/// `z^ν e^{−z²/4t − t} / ((2t)^{ν−1} (z² − 4t²))` (tag `LeadingLargeZ`).
///
/// Valid only for `z > 2t`, where the dominant contribution comes from the
/// lower endpoint `ζ = ln(z/2t) > 0` of the cosh form; flagged `near_pole`
/// for `z < 2.5 t`.
pub fn leading_large_z(p: &ShuParams) -> Result<Approximant> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    if z <= 2.0 * t {
        return Err(ShuError::domain(Field::Argument, z, "must exceed 2t for the large-z form"));
    }
    let denom = (z - 2.0 * t) * (z + 2.0 * t);
    let log_value = nu * z.ln() - p.gamma_argument() - t - (nu - 1.0) * (2.0 * t).ln() - denom.ln();
    let mut a = approximant_from_log(log_value, MethodTag::LeadingLargeZ);
    a.flags.near_pole = z < 2.5 * t;
    Ok(a)
}

/// Leading large-argument term of the incomplete modified Bessel function
/// `½ ∫_{t}^∞ e^{−z cosh τ} cosh(ντ) dτ`:
/// `cosh(νt) e^{−z cosh t} / (2 z sinh t)`.
pub fn leading_imb_large_z(order: f64, z: f64, t_imb: f64) -> Result<Approximant> {
    if !order.is_finite() {
        return Err(ShuError::domain(Field::Order, order, "must be finite"));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(ShuError::domain(Field::Argument, z, "must be finite and > 0"));
    }
    if !(t_imb > 0.0) || !t_imb.is_finite() {
        return Err(ShuError::domain(Field::BesselEndpoint, t_imb, "must be finite and > 0"));
    }
    let nt = (order * t_imb).abs();
    // ln cosh(νt) without overflow.
    let ln_cosh = nt + (0.5 * (1.0 + (-2.0 * nt).exp())).ln();
    let log_value = ln_cosh - z * t_imb.cosh() - (2.0 * z * t_imb.sinh()).ln();
    Ok(approximant_from_log(log_value, MethodTag::LeadingLargeZ))
}
