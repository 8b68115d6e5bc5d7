//! Rotation-invariant limiting eigenvalue laws on the complex plane, given by
//! their radial distribution function `psi` and density `f` (so that
//! `psi(r) = int_0^r 2 pi s f(s) ds`).

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::bisect_increasing;
use crate::transforms::{s_stable, StableLaw};

/// Upper end of the bracket used by the general psi solver.
const PSI_TOP: f64 = 1.0 - 1e-14;
const MONOTONICITY_GRID: usize = 256;

/// An S-transform on `(-1, 0)` supplied by the caller.
pub type STransform = Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>;

fn check_order(l: u32) -> Result<()> {
    if l > 3 {
        return Err(Error::InvalidParameter(format!(
            "closed forms exist for l = 0..=3, got {l}"
        )));
    }
    Ok(())
}

/// Cube-root auxiliaries of the `l = 3` closed form. `v * w = 1`; `w` is
/// taken as `1/v` in rationalized form to avoid cancellation for large `r`.
fn cube_root_pair(r: f64) -> (f64, f64) {
    let sum = 0.5 * (4.0 + 27.0 * r * r).sqrt() + 0.5 * 27f64.sqrt() * r;
    let v = sum.cbrt();
    (v, 1.0 / v)
}

/// Closed-form radial distribution function for products with `l` inverse
/// factors.
pub fn psi_closed(l: u32, r: f64) -> Result<f64> {
    check_order(l)?;
    let r2 = r * r;
    Ok(match l {
        0 => r2.min(1.0),
        1 => r2 / (1.0 + r2),
        2 => 1.0 - 2.0 / ((1.0 + 4.0 * r2).sqrt() + 1.0),
        _ => {
            let (v, w) = cube_root_pair(r);
            1.0 - 3.0 / (1.0 + v * v + w * w)
        }
    })
}

/// Closed-form density matching [`psi_closed`]. `f_0` is `1/pi` on `[0, 1)`.
pub fn density_closed(l: u32, r: f64) -> Result<f64> {
    check_order(l)?;
    let r2 = r * r;
    Ok(match l {
        0 => {
            if r < 1.0 {
                1.0 / PI
            } else {
                0.0
            }
        }
        1 => 1.0 / (PI * (1.0 + r2).powi(2)),
        2 => {
            let q = (1.0 + 4.0 * r2).sqrt();
            2.0 / (PI * q * (1.0 + 2.0 * r2 + q))
        }
        _ => {
            let (v, w) = cube_root_pair(r);
            27.0 * (v + w)
                / (PI * (4.0 + 27.0 * r2).sqrt() * (1.0 + v * v + w * w).powi(3))
        }
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "stable index must lie in (0, 2], got {alpha}"
        )));
    }
    Ok(())
}

fn softplus(s: f64) -> f64 {
    if s > 30.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

/// Solves `psi / (1 - psi)^k = r^2` with `k = 2/alpha - 1` and returns
/// `(psi, 1 - psi)`, both to full relative precision.
///
/// With `t = psi / (1 - psi)` the equation reads `t (1 + t)^{k-1} = r^2`,
/// increasing in `t`; bisection runs in `ln t`.
fn psi_pair(alpha: f64, r: f64) -> (f64, f64) {
    if r <= 0.0 {
        return (0.0, 1.0);
    }
    if alpha == 2.0 {
        let p = (r * r).min(1.0);
        return (p, 1.0 - p);
    }
    let k = 2.0 / alpha - 1.0;
    let target = 2.0 * r.ln();
    let g = |s: f64| s + (k - 1.0) * softplus(s) - target;
    let mut lo = target.min(target / k) - 1.0;
    let mut hi = target.max(target / k) + 1.0;
    while g(lo) > 0.0 {
        lo = 2.0 * lo - 1.0;
    }
    while g(hi) < 0.0 {
        hi = 2.0 * hi + 1.0;
    }
    let s = bisect_increasing(g, lo, hi);
    (1.0 / (1.0 + (-s).exp()), 1.0 / (1.0 + s.exp()))
}

/// Radial distribution function of `H(sigma_s(alpha))`.
pub fn psi_stable(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(psi_pair(alpha, r).0)
}

/// Density of `H(sigma_s(alpha))`, written as
/// `(1 - psi)^{k+1} / (pi (1 + (k - 1) psi))` with `k = 2/alpha - 1`, which is
/// finite at the origin with value `1/pi`.
pub fn density_stable(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 2.0 {
        return density_closed(0, r);
    }
    let k = 2.0 / alpha - 1.0;
    let (psi, rest) = psi_pair(alpha, r);
    Ok(rest.powf(k + 1.0) / (PI * (1.0 + (k - 1.0) * psi)))
}

/// `r^2` as a function of `psi`: `psi / (-(1 - psi) S(-(1 - psi))^2)`.
fn radius_squared<F>(s_transform: &F, psi: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let rest = 1.0 - psi;
    let s = s_transform(Complex64::new(-rest, 0.0))?;
    let denom = -rest * (s * s).re;
    if !(denom > 0.0) {
        return Err(Error::NonMonotone(format!(
            "S({}) = {s} is not on the positive imaginary axis",
            -rest
        )));
    }
    Ok(psi / denom)
}

fn check_monotone<F>(s_transform: &F) -> Result<()>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let mut last = radius_squared(s_transform, 0.0)?;
    for i in 1..=MONOTONICITY_GRID {
        let psi = PSI_TOP * i as f64 / MONOTONICITY_GRID as f64;
        let v = radius_squared(s_transform, psi)?;
        if !(v > last) {
            return Err(Error::NonMonotone(format!(
                "r^2(psi) fails to increase near psi = {psi}"
            )));
        }
        last = v;
    }
    Ok(())
}

fn psi_unchecked<F>(s_transform: &F, r: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    if r <= 0.0 {
        return Ok(0.0);
    }
    let r2 = r * r;
    if r2 >= radius_squared(s_transform, PSI_TOP)? {
        return Ok(1.0);
    }
    let failure = std::cell::RefCell::new(None);
    let psi = bisect_increasing(
        |psi| match radius_squared(s_transform, psi) {
            Ok(v) => v - r2,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        PSI_TOP,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(psi),
    }
}

/// Solves the general psi-equation `psi (1 - psi) = -r^2 (1 - psi)^2 S(-(1 - psi))^2`
/// by bisection on `psi` in `[0, 1 - 1e-14]`.
///
/// Rejects S-transforms for which `r^2(psi)` is not increasing on the bracket.
pub fn psi_from_s_transform<F>(s_transform: &F, r: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    check_monotone(s_transform)?;
    psi_unchecked(s_transform, r)
}

fn density_via_s<F>(s_transform: &F, r: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let psi = psi_unchecked(s_transform, r)?;
    if psi >= 1.0 {
        return Ok(0.0);
    }
    // f = 1 / (pi d(r^2)/d(psi))
    let h = 1e-6 * psi.min(1.0 - psi).max(1e-9);
    let lo = (psi - h).max(0.0);
    let hi = (psi + h).min(PSI_TOP);
    let slope = (radius_squared(s_transform, hi)? - radius_squared(s_transform, lo)?) / (hi - lo);
    Ok(1.0 / (PI * slope))
}

#[derive(Clone)]
pub enum LimitKind {
    /// Product law with `l` inverse factors, `l` in `0..=3`.
    ClosedForm(u32),
    /// `H(sigma_s(alpha))`.
    Stable(f64),
    /// Law defined through the S-transform of its Hermitization.
    ViaSTransform(STransform),
}

impl fmt::Debug for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitKind::ClosedForm(l) => write!(f, "ClosedForm({l})"),
            LimitKind::Stable(a) => write!(f, "Stable({a})"),
            LimitKind::ViaSTransform(_) => write!(f, "ViaSTransform(..)"),
        }
    }
}

/// A rotation-invariant law, dilated by `scale`.
#[derive(Debug, Clone)]
pub struct LimitLaw {
    kind: LimitKind,
    scale: f64,
}

impl LimitLaw {
    pub fn closed_form(l: u32) -> Result<Self> {
        check_order(l)?;
        Ok(Self {
            kind: LimitKind::ClosedForm(l),
            scale: 1.0,
        })
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            kind: LimitKind::Stable(alpha),
            scale: 1.0,
        })
    }

    /// Validates monotonicity of the psi-equation once, up front.
    pub fn via_s_transform(s_transform: STransform) -> Result<Self> {
        check_monotone(&*s_transform)?;
        Ok(Self {
            kind: LimitKind::ViaSTransform(s_transform),
            scale: 1.0,
        })
    }

    pub fn kind(&self) -> &LimitKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Stability index, where the law belongs to the stable family.
    pub fn stable_index(&self) -> Option<f64> {
        match self.kind {
            LimitKind::ClosedForm(l) => Some(2.0 / (l as f64 + 1.0)),
            LimitKind::Stable(a) => Some(a),
            LimitKind::ViaSTransform(_) => None,
        }
    }

    /// Image under `z -> c z`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dilation factor must be positive, got {c}"
            )));
        }
        Ok(Self {
            kind: self.kind.clone(),
            scale: self.scale * c,
        })
    }

    pub fn psi(&self, r: f64) -> Result<f64> {
        let r = r / self.scale;
        match &self.kind {
            LimitKind::ClosedForm(l) => psi_closed(*l, r),
            LimitKind::Stable(a) => psi_stable(*a, r),
            LimitKind::ViaSTransform(s) => psi_unchecked(&**s, r),
        }
    }

    pub fn density(&self, r: f64) -> Result<f64> {
        let x = r / self.scale;
        let base = match &self.kind {
            LimitKind::ClosedForm(l) => density_closed(*l, x),
            LimitKind::Stable(a) => density_stable(*a, x),
            LimitKind::ViaSTransform(s) => density_via_s(&**s, x),
        }?;
        Ok(base / (self.scale * self.scale))
    }

    /// Distribution function of `|z|`, identical to `psi`.
    pub fn radial_cdf(&self, r: f64) -> Result<f64> {
        self.psi(r)
    }

    /// `H(H^{-1}(self) boxplus H^{-1}(other))` for two members of the same
    /// stable family: the dilations combine as `(c1^a + c2^a)^{1/a}`.
    pub fn oplus(&self, other: &LimitLaw) -> Result<LimitLaw> {
        let (Some(a), Some(b)) = (self.stable_index(), other.stable_index()) else {
            return Err(Error::InvalidParameter(
                "oplus is only available within the stable family".into(),
            ));
        };
        if (a - b).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "oplus needs equal stability indices, got {a} and {b}"
            )));
        }
        let scale = (self.scale.powf(a) + other.scale.powf(a)).powf(1.0 / a);
        Ok(LimitLaw {
            kind: LimitKind::Stable(a),
            scale,
        })
    }

    /// Writes `r, psi, pdf, radial_cdf` rows for each radius.
    pub fn write_csv(&self, radii: &[f64], path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "psi", "pdf", "radial_cdf"])?;
        for &r in radii {
            let psi = self.psi(r)?;
            w.write_record(&[
                format!("{r:e}"),
                format!("{psi:e}"),
                format!("{:e}", self.density(r)?),
                format!("{:e}", self.radial_cdf(r)?),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The correspondence `H` on symmetric stable laws: `H(D_c sigma_s(alpha))`
/// is `D_c H(sigma_s(alpha))`.
pub fn h_map(law: &StableLaw) -> Result<LimitLaw> {
    if !law.is_symmetric() {
        return Err(Error::InvalidParameter(
            "H is evaluated on symmetric laws only".into(),
        ));
    }
    let (_, scale) = law.normalized();
    LimitLaw::stable(law.index())?.scaled(scale)
}

/// Dilation of a limit law by `c > 0`.
pub fn scale_law(law: &LimitLaw, c: f64) -> Result<LimitLaw> {
    law.scaled(c)
}

/// `H(sigma_s(alpha))^{oplus m}` together with the normalizer `m^{-1/alpha}`
/// that maps it back onto `H(sigma_s(alpha))`.
pub fn oplus_stable(alpha: f64, m: u32) -> Result<(LimitLaw, f64)> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let growth = (m as f64).powf(1.0 / alpha);
    Ok((LimitLaw::stable(alpha)?.scaled(growth)?, 1.0 / growth))
}

/// The S-transform of `sigma_s(alpha)` as an [`STransform`].
pub fn stable_s_transform(alpha: f64) -> Result<STransform> {
    let law = StableLaw::symmetric(alpha)?;
    Ok(Arc::new(move |z| s_stable(&law, z)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_values() {
        assert_abs_diff_eq!(psi_closed(1, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(psi_closed(0, 0.5).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(psi_closed(0, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        for l in 0..=3 {
            assert_abs_diff_eq!(density_closed(l, 0.0).unwrap(), 1.0 / PI, epsilon = 1e-12);
            assert_abs_diff_eq!(psi_closed(l, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        }
        assert!(psi_closed(4, 1.0).is_err());
    }

    #[test]
    fn psi_three_solves_cubic() {
        // psi = r^2 (1 - psi)^3
        for r in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let psi = psi_closed(3, r).unwrap();
            assert_abs_diff_eq!(psi, r * r * (1.0 - psi).powi(3), epsilon = 1e-12);
        }
    }

    #[test]
    fn stable_examples() {
        assert_abs_diff_eq!(psi_stable(1.0, 1.0).unwrap(), 0.5, epsilon = 1e-14);
        let golden = 1.0 - 2.0 / (5f64.sqrt() + 1.0);
        assert_abs_diff_eq!(psi_stable(2.0 / 3.0, 1.0).unwrap(), golden, epsilon = 1e-14);
        assert_eq!(psi_stable(0.7, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(density_stable(1.0, 1.0).unwrap(), 1.0 / (4.0 * PI), epsilon = 1e-14);
        assert_abs_diff_eq!(density_stable(2.0, 0.5).unwrap(), 1.0 / PI, epsilon = 1e-15);
        let f2 = 2.0 / (PI * 5f64.sqrt() * (3.0 + 5f64.sqrt()));
        assert_abs_diff_eq!(density_stable(2.0 / 3.0, 1.0).unwrap(), f2, epsilon = 1e-14);
        assert_abs_diff_eq!(density_stable(0.3, 0.0).unwrap(), 1.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn general_solver_examples() {
        let cauchy = stable_s_transform(1.0).unwrap();
        for r in [0.0, 0.2, 1.0, 4.0] {
            let psi = psi_from_s_transform(&*cauchy, r).unwrap();
            assert_abs_diff_eq!(psi, psi_closed(1, r).unwrap(), epsilon = 1e-9);
        }
        // S(z) = i^2 z^{1/2}
        let two = |z: Complex64| -> Result<Complex64> {
            Ok(-crate::transforms::pow_slit(z, 0.5)?)
        };
        for r in [0.3, 1.0, 2.0] {
            let psi = psi_from_s_transform(&two, r).unwrap();
            assert_abs_diff_eq!(psi, psi_closed(2, r).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn general_solver_rejects_wrong_branch() {
        let bad = |z: Complex64| -> Result<Complex64> { Ok(z) };
        assert!(matches!(
            psi_from_s_transform(&bad, 1.0),
            Err(Error::NonMonotone(_))
        ));
    }

    #[test]
    fn h_map_examples() {
        let circ = h_map(&StableLaw::symmetric(2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(circ.density(0.5).unwrap(), 1.0 / PI, epsilon = 1e-15);
        let sph = h_map(&StableLaw::symmetric(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(
            sph.density(2.0).unwrap(),
            1.0 / (PI * 25.0),
            epsilon = 1e-14
        );
        let scaled = h_map(&StableLaw::symmetric(1.0).unwrap().scaled(3.0)).unwrap();
        assert_abs_diff_eq!(scaled.psi(3.0).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn scaled_spherical_density() {
        let m = 3.0;
        let law = scale_law(&LimitLaw::closed_form(1).unwrap(), m).unwrap();
        for r in [0.0, 1.0, 5.0] {
            let want = m * m / (PI * (m * m + r * r).powi(2));
            assert_abs_diff_eq!(law.density(r).unwrap(), want, epsilon = 1e-15);
        }
    }

    #[test]
    fn oplus_normalizers() {
        assert_abs_diff_eq!(oplus_stable(1.0, 4).unwrap().1, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(oplus_stable(2.0, 9).unwrap().1, 1.0 / 3.0, epsilon = 1e-15);
        let (law, norm) = oplus_stable(0.8, 1).unwrap();
        assert_eq!(norm, 1.0);
        assert_eq!(law.scale(), 1.0);
        let base = LimitLaw::stable(0.8).unwrap();
        let sum = base.oplus(&base).unwrap().oplus(&base).unwrap();
        let (direct, _) = oplus_stable(0.8, 3).unwrap();
        assert_abs_diff_eq!(sum.scale(), direct.scale(), epsilon = 1e-12);
    }
}
