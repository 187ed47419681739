//! Adaptive Gauss–Kronrod integration and the quadrature oracles for
//! `S_ν(z, t)`.
//!
//! Every oracle integrand is written as `exp(φ(x))` with a unimodal log
//! integrand `φ`. The integral is computed as `exp(φ_peak) ∫ exp(φ − φ_peak)`
//! over panels bounded by level sets of `φ`, so that values far below or
//! above the double range are handled in log space and no panel hides a
//! narrow peak from the Kronrod nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Result, ShuError};
use crate::params::{Evaluation, MethodTag, ShuParams, Tolerances, LN_UNDERFLOW};

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Hard cap on live panels, independent of the depth cap.
const MAX_PANELS: usize = 20_000;

/// Drops of the log integrand (below its peak) used as panel breakpoints.
const BREAK_LEVELS: [f64; 6] = [1.0, 4.0, 16.0, 64.0, 256.0, LN_UNDERFLOW];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate.
    pub error_estimate: f64,
    /// Number of panels in the final partition.
    pub subdivisions: usize,
    pub converged: bool,
}

impl QuadratureResult {
    fn into_checked(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(ShuError::NonConvergence {
                partial: self.value,
                error_estimate: self.error_estimate,
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Gauss–Kronrod 7/15 panel with the QUADPACK error rescaling.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Globally adaptive bisection over an initial partition `breaks`
/// (strictly increasing, finite). Never fails: a hit cap is reported
/// through `converged = false`.
pub(crate) fn integrate_partition<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    tol: &Tolerances,
) -> QuadratureResult {
    let mut heap = BinaryHeap::with_capacity(64);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, error) = gk15(f, a, b);
        total += value;
        total_err += error;
        heap.push(Panel {
            a,
            b,
            value,
            error,
            depth: 0,
        });
    }
    if heap.is_empty() {
        return QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
            converged: true,
        };
    }

    let mut converged = false;
    loop {
        if total_err <= tol.target(total) {
            converged = true;
            break;
        }
        if heap.len() >= MAX_PANELS {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= tol.max_depth || !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        let depth = worst.depth + 1;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            depth,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            depth,
        });
    }

    // Re-sum to shed the drift of the running totals.
    let subdivisions = heap.len();
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    QuadratureResult {
        value,
        error_estimate: error,
        subdivisions,
        converged: converged && error <= tol.target(value) * (1.0 + 1e-9),
    }
}

/// Adaptive integral of `f` over `[a, b]`; `b` may be `+∞`, in which case
/// the range is mapped onto `[0, 1)` by `τ = a + u/(1 − u)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<QuadratureResult> {
    tol.check()?;
    if !a.is_finite() || b.is_nan() || !(a < b) {
        return Err(ShuError::domain(
            crate::error::Field::Argument,
            a,
            "integration range must satisfy finite a < b",
        ));
    }
    if b.is_infinite() {
        let g = |u: f64| {
            let s = 1.0 - u;
            let v = f(a + u / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        integrate_partition(&g, &[0.0, 0.5, 1.0], tol).into_checked()
    } else {
        integrate_partition(&f, &[a, b], tol).into_checked()
    }
}

/// How one side of a unimodal integration range is bounded.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Side {
    /// Hard endpoint of the integral.
    Fixed(f64),
    /// Extends until the integrand underflows, never past `limit`
    /// (which may be infinite).
    Open { limit: f64 },
}

/// `∫ exp(φ)` written as `exp(log_scale) · scaled.value`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledIntegral {
    pub log_scale: f64,
    pub scaled: QuadratureResult,
    /// True when `exp(φ_peak) · width` is below the normal range: nothing
    /// was integrated.
    pub negligible: bool,
}

/// Point where `phi` first drops to `target` moving from `peak` toward
/// `bound` (assumed monotone on that side). Returns `bound` if it never does.
/// NaN values of `phi` (e.g. at `τ = 0`) count as below the target.
fn level_crossing<P: Fn(f64) -> f64>(phi: &P, peak: f64, bound: f64, target: f64) -> f64 {
    let below = |x: f64| !(phi(x) > target);
    if peak == bound {
        return bound;
    }
    let mut inner = peak;
    let mut outer;
    if bound.is_finite() {
        if !below(bound) {
            return bound;
        }
        // Halve the remaining gap toward the limit.
        let mut gap = peak - bound;
        loop {
            gap *= 0.5;
            outer = bound + gap;
            if outer == bound || outer == inner {
                return bound;
            }
            if below(outer) {
                break;
            }
            inner = outer;
        }
    } else {
        let dir = bound.signum();
        let mut step = 1e-2 * peak.abs().max(1.0);
        loop {
            outer = peak + dir * step;
            if !outer.is_finite() {
                return outer;
            }
            if below(outer) {
                break;
            }
            inner = outer;
            step *= 2.0;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        if below(mid) {
            outer = mid;
        } else {
            inner = mid;
        }
    }
    outer
}

/// Breakpoints on one side of the peak, ordered outward from it.
fn side_breaks<P: Fn(f64) -> f64>(phi: &P, peak: f64, phi_peak: f64, side: Side) -> Vec<f64> {
    let (bound, fixed) = match side {
        Side::Fixed(x) => (x, true),
        Side::Open { limit } => (limit, false),
    };
    let mut pts = Vec::with_capacity(BREAK_LEVELS.len() + 1);
    if peak == bound {
        return pts;
    }
    let mut last = peak;
    for &level in BREAK_LEVELS.iter() {
        let x = level_crossing(phi, last, bound, phi_peak - level);
        let beyond = if bound > peak { x >= bound } else { x <= bound };
        if beyond || !x.is_finite() {
            if fixed || bound.is_finite() {
                pts.push(bound);
            }
            return pts;
        }
        if x != last {
            pts.push(x);
            last = x;
        }
    }
    // Past the last level the integrand is below the underflow bound.
    pts
}

/// Integrates `exp(φ)` where `φ` is unimodal with maximum at `peak` (the
/// clamped maximiser inside the range).
pub(crate) fn integrate_unimodal<P: Fn(f64) -> f64>(
    phi: P,
    peak: f64,
    left: Side,
    right: Side,
    log_prefactor: f64,
    tol: &Tolerances,
) -> ScaledIntegral {
    let phi_peak = phi(peak);
    let mut breaks: Vec<f64> = side_breaks(&phi, peak, phi_peak, left);
    breaks.reverse();
    breaks.push(peak);
    breaks.extend(side_breaks(&phi, peak, phi_peak, right));
    breaks.dedup();

    let width = match (breaks.first(), breaks.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let log_scale = log_prefactor + phi_peak;
    if !(width > 0.0) || log_scale + width.ln() < f64::MIN_POSITIVE.ln() {
        return ScaledIntegral {
            log_scale,
            scaled: QuadratureResult {
                value: 0.0,
                error_estimate: 0.0,
                subdivisions: 0,
                converged: true,
            },
            negligible: true,
        };
    }

    // Absolute tolerance expressed in scaled units.
    let abs_scaled = (tol.abs_tol * (-log_scale).exp()).min(f64::MAX);
    let scaled_tol = Tolerances {
        abs_tol: if abs_scaled.is_finite() { abs_scaled } else { f64::MAX },
        ..*tol
    };
    let g = |x: f64| {
        let v = (phi(x) - phi_peak).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let scaled = integrate_partition(&g, &breaks, &scaled_tol);
    ScaledIntegral {
        log_scale,
        scaled,
        negligible: false,
    }
}

/// Turns a scaled integral into an [`Evaluation`], applying the underflow
/// policy and adding the rounding error of the scale factor.
pub(crate) fn finish(si: ScaledIntegral, method: MethodTag) -> Result<Evaluation> {
    let work = si.scaled.subdivisions;
    if si.negligible || si.scaled.value <= 0.0 {
        return Ok(Evaluation::underflow(method, work));
    }
    if !si.scaled.converged {
        let partial = si.scaled.value * si.log_scale.exp();
        return Err(ShuError::NonConvergence {
            partial,
            error_estimate: si.scaled.error_estimate * si.log_scale.exp(),
        });
    }
    let log_value = si.log_scale + si.scaled.value.ln();
    if log_value < f64::MIN_POSITIVE.ln() {
        return Ok(Evaluation::underflow(method, work));
    }
    if log_value > f64::MAX.ln() {
        return Err(ShuError::Overflow);
    }
    let value = log_value.exp();
    let rel = si.scaled.error_estimate / si.scaled.value
        + 4.0 * f64::EPSILON * (1.0 + si.log_scale.abs());
    Ok(Evaluation::new(value, rel * value, method, work))
}

/// Positive root of `y² − b y − c = 0`, computed without cancellation.
fn positive_root(b: f64, c: f64) -> f64 {
    let d = (b * b + 4.0 * c).sqrt();
    if b >= 0.0 {
        0.5 * (b + d)
    } else {
        2.0 * c / (d - b)
    }
}

/// `S_ν(z, t)` by quadrature of the alternate form
/// `½ (2/z)^ν ∫_{z²/4t}^∞ y^{ν−1} e^{−y − z²/(4y)} dy` (tag `Oracle5`).
pub fn shu_oracle(p: &ShuParams, tol: &Tolerances) -> Result<Evaluation> {
    tol.check()?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let c = 0.25 * z * z;
    let lower = c / t;
    if !lower.is_finite() {
        return Ok(Evaluation::underflow(MethodTag::Oracle5, 0));
    }
    let phi = |y: f64| (nu - 1.0) * y.ln() - y - c / y;
    let peak = positive_root(nu - 1.0, c).max(lower);
    let log_pref = -std::f64::consts::LN_2 + nu * (2.0 / z).ln();
    let si = integrate_unimodal(
        phi,
        peak,
        Side::Fixed(lower),
        Side::Open {
            limit: f64::INFINITY,
        },
        log_pref,
        tol,
    );
    finish(si, MethodTag::Oracle5)
}

/// `S_ν(z, t)` by quadrature of the defining integral on `(0, t]`
/// (tag `Oracle2`). The left end is clamped where the integrand drops
/// below the underflow bound.
pub fn shu_oracle_direct(p: &ShuParams, tol: &Tolerances) -> Result<Evaluation> {
    tol.check()?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let c = 0.25 * z * z;
    let psi = |tau: f64| -(nu + 1.0) * tau.ln() - tau - c / tau;
    // ψ'(τ) = 0  ⇔  τ² + (ν+1) τ − c = 0
    let peak = positive_root(-(nu + 1.0), c).min(t);
    let log_pref = -std::f64::consts::LN_2 + nu * (0.5 * z).ln();
    let si = integrate_unimodal(
        psi,
        peak,
        Side::Open { limit: 0.0 },
        Side::Fixed(t),
        log_pref,
        tol,
    );
    finish(si, MethodTag::Oracle2)
}

/// `S_ν(z, t)` by quadrature of `½ ∫_{ln(z/2t)}^∞ e^{−z cosh w + ν w} dw`
/// (tag `Oracle4`).
pub fn shu_oracle_cosh(p: &ShuParams, tol: &Tolerances) -> Result<Evaluation> {
    tol.check()?;
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    let lower = (z / (2.0 * t)).ln();
    let chi = |w: f64| -z * w.cosh() + nu * w;
    let peak = (nu / z).asinh().max(lower);
    let si = integrate_unimodal(
        chi,
        peak,
        Side::Fixed(lower),
        Side::Open {
            limit: f64::INFINITY,
        },
        -std::f64::consts::LN_2,
        tol,
    );
    finish(si, MethodTag::Oracle4)
}
