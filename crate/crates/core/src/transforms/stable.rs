use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `e^{(-pi + alpha*pi/2) i}`, the R-transform coefficient of the symmetric
/// free stable law of index `alpha`.
pub fn stable_b(alpha: f64) -> Complex64 {
    Complex64::from_polar(1.0, -PI + alpha * PI / 2.0)
}

/// Power of `z` with the argument taken in `(-2pi, 0)`.
///
/// This is the S-transform convention: on `(-1, 0)` the argument is `-pi`.
/// Points on the ray `[0, +inf)` are rejected.
pub fn pow_slit(z: Complex64, exponent: f64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::BranchViolation(z));
    }
    let mut arg = z.im.atan2(z.re);
    if arg >= 0.0 {
        arg -= 2.0 * PI;
    }
    Ok(Complex64::from_polar(z.norm().powf(exponent), exponent * arg))
}

/// Power of `w` with the argument clamped to `[0, pi]`.
///
/// Used for reciprocal Cauchy transforms, which live in the closed upper
/// half-plane; tiny negative imaginary parts from rounding are snapped onto
/// the nearest boundary ray.
pub(crate) fn pow_upper(w: Complex64, exponent: f64) -> Complex64 {
    let mut arg = w.im.atan2(w.re);
    if arg < 0.0 {
        arg = if arg < -PI / 2.0 { PI } else { 0.0 };
    }
    Complex64::from_polar(w.norm().powf(exponent), exponent * arg)
}

/// Principal power, argument in `(-pi, pi]`.
pub(crate) fn pow_principal(c: Complex64, exponent: f64) -> Complex64 {
    Complex64::from_polar(c.norm().powf(exponent), exponent * c.arg())
}

/// The S-transform of the Marchenko–Pastur law `gamma`: `1 / (z + 1)`.
pub fn s_mp(z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(-1.0, 0.0) {
        return Err(Error::PoleAtMinusOne);
    }
    Ok(1.0 / (z + 1.0))
}

/// The S-transform of the inverse Marchenko–Pastur law: `-z`.
pub fn s_mp_inv(z: Complex64) -> Complex64 {
    -z
}

/// Which member of the power-R family a [`StableLaw`] is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum StableVariant {
    /// Symmetric free stable law `sigma_s(alpha)`, `R(z) = b z^{alpha-1}`.
    Symmetric { alpha: f64 },
    /// Positive free stable law `sigma_p(alpha_tilde)`, supported on a
    /// half-line bounded away from zero.
    Positive { alpha_tilde: f64 },
    /// `R(z) = coef * z^{power-1}` with an unconstrained coefficient.
    PowerR { coef: Complex64, power: f64 },
}

/// A law whose R-transform is a pure power, optionally dilated by `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    pub variant: StableVariant,
    pub scale: f64,
}

impl StableLaw {
    pub fn symmetric(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "symmetric stable index must lie in (0, 2], got {alpha}"
            )));
        }
        Ok(Self {
            variant: StableVariant::Symmetric { alpha },
            scale: 1.0,
        })
    }

    pub fn positive(alpha_tilde: f64) -> Result<Self> {
        if !(alpha_tilde > 0.0 && alpha_tilde < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "positive stable index must lie in (0, 1), got {alpha_tilde}"
            )));
        }
        Ok(Self {
            variant: StableVariant::Positive { alpha_tilde },
            scale: 1.0,
        })
    }

    pub fn power_r(coef: Complex64, power: f64) -> Result<Self> {
        if !(power > 0.0 && power <= 2.0) || coef.norm() == 0.0 || !coef.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power-R law needs power in (0, 2] and nonzero coefficient, got ({coef}, {power})"
            )));
        }
        Ok(Self {
            variant: StableVariant::PowerR { coef, power },
            scale: 1.0,
        })
    }

    /// The dilation `D_c` of this law.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            variant: self.variant,
            scale: self.scale * c,
        }
    }

    /// Stability index, i.e. the exponent `p` in `R(z) = c z^{p-1}`.
    pub fn index(&self) -> f64 {
        match self.variant {
            StableVariant::Symmetric { alpha } => alpha,
            StableVariant::Positive { alpha_tilde } => alpha_tilde,
            StableVariant::PowerR { power, .. } => power,
        }
    }

    /// R-transform coefficient of the undilated law.
    pub fn r_coefficient(&self) -> Complex64 {
        match self.variant {
            StableVariant::Symmetric { alpha } => stable_b(alpha),
            StableVariant::Positive { alpha_tilde } => {
                Complex64::from_polar(1.0, -PI + alpha_tilde * PI)
            }
            StableVariant::PowerR { coef, .. } => coef,
        }
    }

    /// Splits the law into a unit-modulus coefficient and a total dilation,
    /// using `D_s` multiplying the coefficient by `s^p`.
    pub(crate) fn normalized(&self) -> (Complex64, f64) {
        let c = self.r_coefficient();
        let p = self.index();
        let m = c.norm();
        (c / m, self.scale * m.powf(1.0 / p))
    }

    /// True when the law lives on `(0, inf)`: index below one and the
    /// coefficient argument equal to `-pi + p*pi`.
    pub fn has_positive_support(&self) -> bool {
        let p = self.index();
        if p >= 1.0 {
            return false;
        }
        let (c, _) = self.normalized();
        (c.arg() - (-PI + p * PI)).abs() < 1e-12
    }

    pub fn is_symmetric(&self) -> bool {
        let p = self.index();
        let (c, _) = self.normalized();
        (c.arg() - (-PI + p * PI / 2.0)).abs() < 1e-12
    }

    /// Left end of the support for positive laws: `p (1-p)^{1/p - 1}` before
    /// dilation. `None` for laws supported on the whole line.
    pub fn support_lower_edge(&self) -> Option<f64> {
        if !self.has_positive_support() {
            return None;
        }
        let p = self.index();
        let (_, s) = self.normalized();
        Some(s * p * (1.0 - p).powf(1.0 / p - 1.0))
    }
}

/// S-transform `z^{1/p - 1} / c^{1/p}` of a power-R law, divided by the
/// dilation. Powers of `z` use arguments in `(-2pi, 0)`, powers of the
/// coefficient the principal branch.
pub fn s_stable(law: &StableLaw, z: Complex64) -> Result<Complex64> {
    let p = law.index();
    let c = law.r_coefficient();
    let zp = pow_slit(z, 1.0 / p - 1.0)?;
    Ok(zp / pow_principal(c, 1.0 / p) / law.scale)
}

/// Relation between the symmetric index `alpha` and the positive index
/// `alpha_tilde = 2 alpha / (2 + alpha)` of the diagonal matrix model.
pub fn alpha_tilde(alpha: f64) -> f64 {
    2.0 * alpha / (2.0 + alpha)
}
