//! One-parameter Mittag-Leffler function `E_alpha(z) = sum_k z^k / Gamma(alpha k + 1)` on the
//! completely monotone branch `0 < alpha <= 1`, `z <= 0`.
//!
//! Three evaluation routes:
//!
//! - power series for `|z| <= SERIES_RADIUS`, accepted only while the largest term stays
//!   below [`SERIES_MAX_TERM`] (small `alpha` makes the alternating series cancel badly);
//! - the spectral representation `E_alpha(-t^alpha) = int_0^inf exp(-r t) K_alpha(r) dr`,
//!   `K_alpha(r) = sin(alpha pi) r^{alpha-1} / (pi (r^{2 alpha} + 2 r^alpha cos(alpha pi) + 1))`,
//!   integrated by the trapezoid rule in `y = ln r`;
//! - the algebraic expansion `-sum_{k>=1} z^{-k} / Gamma(1 - alpha k)` for
//!   `|z| >= ASYMPTOTIC_RADIUS`, whose leading term is `-1/(z Gamma(1 - alpha))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SERIES_RADIUS: f64 = 5.0;
pub const SERIES_MAX_TERM: f64 = 1e4;
pub const ASYMPTOTIC_RADIUS: f64 = 50.0;

const ASYMPTOTIC_TERMS: usize = 30;
const SERIES_MAX_ITERS: usize = 2000;
const MIN_QUADRATURE_STEP: f64 = 1e-5;

/// Which branch produced a value, exposed for cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exponential,
    Series,
    Integral,
    Asymptotic,
}

pub fn mittag_leffler(alpha: f64, z: f64) -> Result<f64> {
    mittag_leffler_with_method(alpha, z).map(|(v, _)| v)
}

pub fn mittag_leffler_with_method(alpha: f64, z: f64) -> Result<(f64, Method)> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(z.is_finite() && z <= 0.0) {
        return Err(Error::domain(format!("only z <= 0 is supported, got {z}")));
    }
    if alpha == 1.0 {
        return Ok((z.exp(), Method::Exponential));
    }
    if z == 0.0 {
        return Ok((1.0, Method::Series));
    }
    let x = -z;
    if x <= SERIES_RADIUS {
        if let Some(v) = series(alpha, z) {
            return Ok((v, Method::Series));
        }
    }
    if x >= ASYMPTOTIC_RADIUS {
        return Ok((asymptotic(alpha, z), Method::Asymptotic));
    }
    integral(alpha, x).map(|v| (v, Method::Integral))
}

fn inv_gamma(x: f64) -> f64 {
    // 1/Gamma vanishes at the poles 0, -1, -2, ...
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / libm::tgamma(x)
    }
}

/// Power series; `None` when cancellation would cost more than four digits.
pub fn series(alpha: f64, z: f64) -> Option<f64> {
    let lnx = (-z).ln();
    let mut sum = 1.0;
    let mut max_term: f64 = 1.0;
    for k in 1..SERIES_MAX_ITERS {
        let arg = alpha * k as f64 + 1.0;
        let magnitude = if arg < 170.0 {
            (-z).powi(k as i32) / libm::tgamma(arg)
        } else {
            (k as f64 * lnx - libm::lgamma(arg)).exp()
        };
        let term = if k % 2 == 0 { magnitude } else { -magnitude };
        max_term = max_term.max(magnitude);
        if max_term > SERIES_MAX_TERM {
            return None;
        }
        sum += term;
        if magnitude < 1e-17 * sum.abs().max(1e-300) && k > 5 {
            return Some(sum);
        }
    }
    None
}

/// Trapezoid rule for the spectral integral, for `E_alpha(-x)`, `x > 0`.
pub fn integral(alpha: f64, x: f64) -> Result<f64> {
    let t = x.powf(1.0 / alpha);
    let (s, c) = (alpha * PI).sin_cos();
    // Poles of K_alpha in the y = ln r plane sit at distance pi (1 - alpha) / alpha.
    let pole_distance = PI * (1.0 - alpha) / alpha;
    let h = (pole_distance / 5.0).min(0.1);
    if h < MIN_QUADRATURE_STEP {
        return Err(Error::domain(format!(
            "E_alpha(z) for alpha={alpha} this close to 1 is unsupported at z={}",
            -x
        )));
    }
    // Left tail ~ sin(alpha pi)/(pi alpha) e^{alpha y}; right tail is exp(-t e^y).
    let y_lo = (1e-18 * PI * alpha / s.max(1e-300)).ln() / alpha;
    let y_hi = (750.0 / t).ln().max(y_lo + 1.0);
    let steps = ((y_hi - y_lo) / h).ceil() as usize;
    let mut acc = 0.0;
    for i in 0..=steps {
        let y = y_lo + i as f64 * h;
        let r = y.exp();
        let ra = (alpha * y).exp();
        let kernel = s * ra / (PI * (ra * ra + 2.0 * ra * c + 1.0));
        let f = (-r * t).exp() * kernel;
        acc += if i == 0 || i == steps { 0.5 * f } else { f };
    }
    Ok(acc * h)
}

/// Algebraic expansion for large `|z|`.
pub fn asymptotic(alpha: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zpow = 1.0;
    for k in 1..=ASYMPTOTIC_TERMS {
        zpow /= z;
        sum -= zpow * inv_gamma(1.0 - alpha * k as f64);
    }
    sum
}
