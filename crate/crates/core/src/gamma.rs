//! Gamma-family building blocks: `Γ(a)`, `Γ(a, x)` for any real order,
//! its large-`x` asymptotic series, the Pochhammer symbol and `K_ν(z)`.

use std::f64::consts::PI;

use crate::error::{Field, Result, ShuError};
use crate::params::{Evaluation, MethodTag, Tolerances, TruncatedSum};
use crate::quadrature::{finish, integrate_unimodal, Side};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Iteration cap for the continued fraction and the power series.
const MAX_ITER: usize = 2_000;

/// Largest argument whose factorial is finite in double precision.
const MAX_FACTORIAL_ARG: u32 = 170;

/// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ζ(k)` for k = 2..=25, used in the Taylor series of `ln Γ(1 + a)`.
const ZETA: [f64; 24] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
];

/// Order `a` of `Γ(a)` or `Γ(a, x)`; always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GammaOrder(f64);

impl GammaOrder {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(GammaOrder(value))
        } else {
            Err(ShuError::domain(Field::Order, value, "gamma order must be finite"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True at the poles `0, −1, −2, …` of `Γ`.
    pub fn is_pole(self) -> bool {
        self.0 <= 0.0 && self.0 == self.0.floor()
    }
}

/// `sin(π a)` with the argument reduced exactly first.
fn sin_pi(a: f64) -> f64 {
    let n = a.round();
    let r = a - n;
    let s = (PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

fn lanczos_positive(a: f64) -> f64 {
    // Γ(a) for a ≥ 0.5.
    let x = a - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // t^(x+1/2) split in two halves to delay overflow.
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * sum
}

/// The gamma function `Γ(a)`.
pub fn gamma(a: f64) -> Result<f64> {
    let order = GammaOrder::new(a)?;
    if order.is_pole() {
        return Err(ShuError::Pole(a));
    }
    if a > 171.7 {
        return Err(ShuError::Overflow);
    }
    if a == a.floor() && a >= 1.0 && a <= f64::from(MAX_FACTORIAL_ARG + 1) {
        // Exact factorial; every partial product is an exact integer up to 22!.
        let n = a as u32 - 1;
        return Ok((2..=n).fold(1.0, |acc, k| acc * f64::from(k)));
    }
    let value = if a < 0.5 {
        let reflected = lanczos_positive(1.0 - a);
        let denom = sin_pi(a) * reflected;
        if denom == 0.0 || !denom.is_finite() {
            // 1/∞ for very negative a: the true value underflows.
            0.0
        } else {
            PI / denom
        }
    } else {
        lanczos_positive(a)
    };
    if value.is_infinite() {
        return Err(ShuError::Overflow);
    }
    Ok(value)
}

/// `(Γ(1 + a) − 1)/a` for `a ∈ [0, 1]`, free of cancellation near 0.
fn gamma1pm1_over_a(a: f64) -> f64 {
    if a == 0.0 {
        return -EULER_GAMMA;
    }
    if a <= 0.2 {
        // ln Γ(1+a) = −γ a + Σ_{k≥2} (−1)^k ζ(k) a^k / k
        let mut lg = -EULER_GAMMA * a;
        let mut pow = -a;
        for (i, z) in ZETA.iter().enumerate() {
            let k = (i + 2) as f64;
            pow *= -a;
            lg += z * pow / k;
        }
        lg.exp_m1() / a
    } else {
        (lanczos_positive(1.0 + a) - 1.0) / a
    }
}

/// Modified Lentz evaluation of the Legendre continued fraction for
/// `Γ(a, x) e^x x^{−a}`. Valid for every real `a`; fast once `x ≳ 1`.
fn scaled_upper_cf(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = if b.abs() < TINY { 1.0 / TINY } else { 1.0 / b };
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let an = -fi * (fi - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            return Ok(h);
        }
    }
    Err(ShuError::NonConvergence {
        partial: h,
        error_estimate: h.abs(),
    })
}

/// `Γ(a, x)` for `a ∈ [0, 1]`, `0 < x < 1` via
/// `(Γ(1+a) − 1)/a − (x^a − 1)/a − x^a Σ_{n≥1} (−x)^n / (n! (a+n))`.
/// The `a = 0` limit is the exponential-integral series for `E₁(x)`.
fn upper_small_x(a: f64, x: f64) -> Result<f64> {
    let lnx = x.ln();
    let head = gamma1pm1_over_a(a);
    let pow_term = if a == 0.0 { lnx } else { (a * lnx).exp_m1() / a };
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut converged = false;
    for n in 1..MAX_ITER {
        let fnn = n as f64;
        term *= -x / fnn;
        let contrib = term / (a + fnn);
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ShuError::NonConvergence {
            partial: sum,
            error_estimate: sum.abs(),
        });
    }
    Ok(head - pow_term - (a * lnx).exp() * sum)
}

/// Lower incomplete gamma `γ(a, x) e^x x^{−a}` by its power series
/// (`a > 0`).
fn scaled_lower_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..MAX_ITER {
        term *= x / (a + n as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            return Ok(sum);
        }
    }
    Err(ShuError::NonConvergence {
        partial: sum,
        error_estimate: term.abs(),
    })
}

/// `Γ(a, x) e^x x^{−a}`, the scaled upper incomplete gamma function.
///
/// The scaling removes the `x^a e^{−x}` envelope, so the result stays in
/// range for large `x` or large negative `a` where `Γ(a, x)` itself would
/// underflow or overflow.
pub fn upper_incomplete_gamma_scaled(a: f64, x: f64) -> Result<f64> {
    GammaOrder::new(a)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(ShuError::domain(Field::GammaArgument, x, "must be finite and > 0"));
    }
    if x >= 1.0 && (a <= 1.0 || x >= a + 1.0) {
        return scaled_upper_cf(a, x);
    }
    let envelope = |order: f64, v: f64| v * (x - order * x.ln()).exp();
    if a > 1.0 {
        let g = gamma(a)?;
        let lower = scaled_lower_series(a, x)?;
        return Ok(envelope(a, g) - lower);
    }
    // x < 1, a ≤ 1.
    if a >= 0.0 {
        return Ok(envelope(a, upper_small_x(a, x)?));
    }
    // Downward recurrence G(b−1) = (x G(b) − 1)/(b − 1) from an anchor in [0, 1).
    let anchor = a - a.floor();
    let steps = (anchor - a).round() as usize;
    if steps > 100_000 {
        return scaled_upper_cf(a, x);
    }
    let mut g = envelope(anchor, upper_small_x(anchor, x)?);
    let mut b = anchor;
    for _ in 0..steps {
        g = (x * g - 1.0) / (b - 1.0);
        b -= 1.0;
    }
    Ok(g)
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ τ^{a−1} e^{−τ} dτ` for any real
/// order `a` and `x > 0`.
///
/// For `x ≥ 1` the Legendre continued fraction is used for every `a ≤ 1`
/// (and for `x ≥ a + 1`). Below `x = 1`, orders in `[0, 1]` use a
/// cancellation-free series (the exponential integral at `a = 0`), and
/// negative orders recur downward from that anchor.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    let g = upper_incomplete_gamma_scaled(a, x)?;
    let log_env = a * x.ln() - x;
    if log_env > f64::MAX.ln() {
        let log_val = log_env + g.ln();
        if log_val > f64::MAX.ln() {
            return Err(ShuError::Overflow);
        }
        return Ok(log_val.exp());
    }
    Ok(g * log_env.exp())
}

/// Exponential integral `E₁(x) = Γ(0, x)`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    upper_incomplete_gamma(0.0, x)
}

/// Optimally truncated large-`x` series
/// `Γ(a, x) ≈ x^{a−1} e^{−x} Σ_{m=0}^{m_max} (−1)^m (1−a)_m x^{−m}`.
///
/// Summation stops at the smallest term, at an exactly vanishing term
/// (positive integer `a`), or once terms fall below double precision of
/// the partial sum. `tail_bound` is the magnitude of the first omitted
/// term, in the same units as `value`.
pub fn incomplete_gamma_asymptotic(a: f64, x: f64, m_max: usize) -> Result<TruncatedSum> {
    GammaOrder::new(a)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(ShuError::domain(Field::GammaArgument, x, "must be finite and > 0"));
    }
    let inner = asymptotic_inner(1.0 - a, x, m_max);
    let envelope = ((a - 1.0) * x.ln() - x).exp();
    Ok(TruncatedSum {
        value: envelope * inner.value,
        terms_used: inner.terms_used,
        last_term: envelope * inner.last_term,
        tail_bound: envelope * inner.tail_bound,
    })
}

/// `Σ_m (−1)^m (s)_m x^{−m}` with the truncation policy of
/// [`incomplete_gamma_asymptotic`]; unscaled.
pub(crate) fn asymptotic_inner(s: f64, x: f64, m_max: usize) -> TruncatedSum {
    let mut sum: f64 = 1.0;
    let mut term: f64 = 1.0;
    let mut terms_used = 1;
    let mut tail = 0.0;
    for m in 1..=m_max + 1 {
        let next = -term * (s + (m - 1) as f64) / x;
        if next == 0.0 {
            tail = 0.0;
            break;
        }
        if m > m_max || next.abs() >= term.abs() || next.abs() <= f64::EPSILON * 0.5 * sum.abs() {
            tail = next.abs();
            if next.abs() < term.abs() && m <= m_max {
                // Below rounding of the sum: include and stop.
                sum += next;
                terms_used += 1;
                term = next;
                tail = (term * (s + m as f64) / x).abs();
            }
            break;
        }
        sum += next;
        term = next;
        terms_used += 1;
    }
    TruncatedSum {
        value: sum,
        terms_used,
        last_term: term.abs(),
        tail_bound: tail,
    }
}

/// Rising factorial `(a)_m = a (a+1) … (a+m−1)`, `(a)_0 = 1`.
pub fn pochhammer(a: f64, m: u32) -> Result<f64> {
    let mut p = 1.0;
    for k in 0..m {
        p *= a + f64::from(k);
        if p == 0.0 {
            return Ok(0.0);
        }
    }
    if p.is_finite() {
        Ok(p)
    } else {
        Err(ShuError::Overflow)
    }
}

/// `K_ν(z)` with an error estimate, by quadrature of
/// `½ ∫_{−∞}^{∞} e^{−z cosh w + |ν| w} dw`. Tagged `LeadingLargeT` since
/// it is the large-endpoint limit of `S_ν(z, t)`.
pub fn macdonald_k_eval(order: f64, z: f64, tol: &Tolerances) -> Result<Evaluation> {
    GammaOrder::new(order)?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(ShuError::domain(Field::Argument, z, "must be finite and > 0"));
    }
    tol.check()?;
    // K is even in the order.
    let nu = order.abs();
    let chi = |w: f64| -z * w.cosh() + nu * w;
    let peak = (nu / z).asinh();
    let si = integrate_unimodal(
        chi,
        peak,
        Side::Open {
            limit: f64::NEG_INFINITY,
        },
        Side::Open {
            limit: f64::INFINITY,
        },
        -std::f64::consts::LN_2,
        tol,
    );
    finish(si, MethodTag::LeadingLargeT)
}

/// Macdonald function `K_ν(z)` to about 1e-13 relative accuracy.
/// Returns 0 when the value is below the smallest normal double.
pub fn macdonald_k(order: f64, z: f64) -> Result<f64> {
    macdonald_k_eval(order, z, &Tolerances::relative(1e-13)).map(|e| e.value)
}
