//! Elementary closed form of `S_{±1/2}(z, t)` in terms of the complementary
//! error function.
//!
//! With `a = z/(2√t)` and `b = √t`,
//!
//! ```text
//! S_{1/2}  = ½ √(z/2) (√π/z) [e^{−z} erfc(a − b) + e^{z} erfc(a + b)]
//! S_{−1/2} = ½ √(2/z) (√π/2) [e^{−z} erfc(a − b) − e^{z} erfc(a + b)]
//! ```
//!
//! Both exponential–erfc products equal `e^{−z²/4t − t} erfcx(a ∓ b)`, which
//! is how they are evaluated. The `ν = −1/2` difference cancels when
//! `t ≪ z`; the error estimate accounts for it and the front-end falls back
//! to another method when it is too large.

use std::f64::consts::PI;

use crate::error::{Field, Result, ShuError};
use crate::params::{Evaluation, MethodTag, ShuParams};

/// Scaled complementary error function `erfcx(x) = e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfc(−y) = 2 − erfc(y)
        let y = -x;
        return 2.0 * (y * y).exp() - erfcx(y);
    }
    if x < 5.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // Continued fraction erfc(x) = e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …)))),
    // evaluated backward; 60 levels are far more than needed for x ≥ 5.
    let mut f = x;
    for n in (1..=60).rev() {
        f = x + 0.5 * n as f64 / f;
    }
    1.0 / (PI.sqrt() * f)
}

/// `e^{−z} erfc(a − b)`, where `envelope = e^{−z²/4t − t}`.
fn minus_term(z: f64, a: f64, b: f64, envelope: f64) -> f64 {
    let d = a - b;
    if d >= 0.0 {
        envelope * erfcx(d)
    } else {
        // erfc(d) ∈ (1, 2]; the envelope form would overflow erfcx.
        (-z).exp() * libm::erfc(d)
    }
}

/// `S_ν(z, t)` for `ν = ±1/2` (tag `ClosedFormHalf`).
pub fn shu_half(p: &ShuParams) -> Result<Evaluation> {
    let (nu, z, t) = (p.order(), p.argument(), p.endpoint());
    if nu != 0.5 && nu != -0.5 {
        return Err(ShuError::domain(Field::Order, nu, "closed form needs order ±1/2"));
    }
    let b = t.sqrt();
    let a = 0.5 * z / b;
    let log_env = -p.gamma_argument() - t;
    let envelope = log_env.exp();
    let first = minus_term(z, a, b, envelope);
    let second = envelope * erfcx(a + b);
    let (combined, pref) = if nu > 0.0 {
        (first + second, 0.5 * (0.5 * z).sqrt() * PI.sqrt() / z)
    } else {
        (first - second, 0.5 * (2.0 / z).sqrt() * 0.5 * PI.sqrt())
    };
    let value = pref * combined;
    // Rounding in erfcx and in the exponent arguments, amplified by the
    // cancellation ratio (first + second)/|combined|.
    let rounding = f64::EPSILON * (16.0 + 2.0 * (log_env.abs() + z));
    let err = pref * (first + second) * rounding;
    if value < f64::MIN_POSITIVE {
        return Ok(Evaluation::underflow(MethodTag::ClosedFormHalf, 1));
    }
    Ok(Evaluation::new(value, err, MethodTag::ClosedFormHalf, 1))
}
