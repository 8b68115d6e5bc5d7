//! Marchenko–Pastur law on `(0, 4)`.

use std::f64::consts::PI;

use crate::numerics::adaptive_simpson;

pub fn mp_density(x: f64) -> f64 {
    if x > 0.0 && x < 4.0 {
        ((4.0 - x) / x).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// Distribution function by quadrature after `x = 4 sin^2(theta)`, which
/// turns the integrand into the smooth `(4/pi) cos^2(theta)`.
pub fn mp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 4.0 {
        return 1.0;
    }
    let theta = (x / 4.0).sqrt().asin();
    adaptive_simpson(|t| 4.0 / PI * t.cos().powi(2), 0.0, theta, 1e-12).clamp(0.0, 1.0)
}
