//! Cauchy transforms of laws with power-form R-transform.
//!
//! The solver works with `w = 1/G`, which lies in the upper half-plane, and
//! the equation `w + c w^{1-p} = z`. Roots are tracked by continuation from a
//! point high above the real axis where the fixed-point map is a contraction.

use num_complex::Complex64;

use super::stable::pow_upper;
use crate::error::{Error, Result};

const MAX_NEWTON: usize = 200;
const MAX_SUBDIVISION: u32 = 20;
/// Boundary approach heights, geometric with ratio 10.
const EPSILON_SCHEDULE: [f64; 6] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[derive(Debug, Clone, Copy)]
struct PowerEquation {
    coef: Complex64,
    power: f64,
}

impl PowerEquation {
    fn residual(&self, w: Complex64, z: Complex64) -> Complex64 {
        w + self.coef * pow_upper(w, 1.0 - self.power) - z
    }

    fn derivative(&self, w: Complex64) -> Complex64 {
        1.0 + self.coef * (1.0 - self.power) * pow_upper(w, -self.power)
    }

    fn tolerance(&self, w: Complex64, z: Complex64) -> f64 {
        1e-12 * 1f64.max(z.norm()).max(w.norm())
    }

    /// Height above which `w -> z - c w^{1-p}` contracts near `w = z`.
    fn safe_height(&self) -> f64 {
        let k = 4.0 * (1.0 - self.power).abs().max(0.1) * self.coef.norm();
        (k.powf(1.0 / self.power) + 2.0).min(1e12)
    }

    /// Damped Newton. On the real axis (`boundary`) iterates are projected onto
    /// the closed upper half-plane; otherwise they must stay strictly inside.
    fn newton(&self, z: Complex64, w0: Complex64, boundary: bool) -> Result<Complex64> {
        let mut w = w0;
        let mut r = self.residual(w, z).norm();
        for _ in 0..MAX_NEWTON {
            if r == 0.0 {
                return Ok(w);
            }
            let step = self.residual(w, z) / self.derivative(w);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let mut cand = w - lambda * step;
                if boundary {
                    cand.im = cand.im.max(0.0);
                }
                if cand.im >= 0.0 && (boundary || cand.im > 0.0) && cand.is_finite() {
                    let rc = self.residual(cand, z).norm();
                    if rc < r {
                        accepted = Some((cand, rc));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some((next, rn)) = accepted else {
                // No descent possible: either at machine precision or stuck.
                return if r <= self.tolerance(w, z) {
                    Ok(w)
                } else {
                    Err(Error::NoConvergence { residual: r })
                };
            };
            let moved = (next - w).norm();
            w = next;
            r = rn;
            if moved <= 4e-16 * w.norm() && r <= self.tolerance(w, z) {
                return Ok(w);
            }
        }
        if r <= self.tolerance(w, z) {
            Ok(w)
        } else {
            Err(Error::NoConvergence { residual: r })
        }
    }

    fn seed(&self, z: Complex64) -> Complex64 {
        let mut w = z;
        for _ in 0..100 {
            let next = z - self.coef * pow_upper(w, 1.0 - self.power);
            let done = (next - w).norm() <= 1e-14 * next.norm();
            w = next;
            if done {
                break;
            }
        }
        w
    }

    /// Moves a solution at `from` to the solution at `to` with an Euler
    /// predictor and Newton corrector, subdividing on failure.
    fn advance(&self, w: Complex64, from: Complex64, to: Complex64, depth: u32) -> Result<Complex64> {
        let boundary = to.im == 0.0;
        let predicted = w + (to - from) / self.derivative(w);
        let mut guess = predicted;
        if boundary {
            guess.im = guess.im.max(0.0);
        } else if guess.im <= 0.0 {
            guess = w;
        }
        match self.newton(to, guess, boundary) {
            Ok(next) => Ok(next),
            Err(e) if depth >= MAX_SUBDIVISION => Err(e),
            Err(_) => {
                let mid = 0.5 * (from + to);
                let half = self.advance(w, from, mid, depth + 1)?;
                self.advance(half, mid, to, depth + 1)
            }
        }
    }

    /// Solution at `x + i*height` reached from the contraction region.
    fn descend(&self, x: f64, height: f64) -> Result<(Complex64, f64)> {
        let top = self.safe_height();
        let mut y = top.max(height);
        let start = Complex64::new(x, y);
        let mut w = self.newton(start, self.seed(start), false)?;
        while y > height {
            let next_y = (0.5 * y).max(height);
            w = self.advance(w, Complex64::new(x, y), Complex64::new(x, next_y), 0)?;
            y = next_y;
        }
        Ok((w, y))
    }

    fn solve(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.descend(z.re, z.im)?.0)
    }

    fn solve_boundary(&self, x: f64) -> Result<Complex64> {
        let (mut w, mut y) = self.descend(x, 1e-2)?;
        let mut trail = Vec::with_capacity(EPSILON_SCHEDULE.len());
        for eps in EPSILON_SCHEDULE {
            w = self.advance(w, Complex64::new(x, y), Complex64::new(x, eps), 0)?;
            y = eps;
            trail.push(w);
        }
        let z0 = Complex64::new(x, 0.0);
        match self.newton(z0, Complex64::new(w.re, w.im.max(0.0)), true) {
            Ok(w0) => Ok(w0),
            Err(_) => {
                let (near, far) = (trail[trail.len() - 1], trail[trail.len() - 2]);
                let g = 1.0 / near + (1.0 / near - 1.0 / far) / 9.0;
                Ok(1.0 / g)
            }
        }
    }
}

fn checked(coef: Complex64, power: f64) -> Result<PowerEquation> {
    if !(power > 0.0 && power <= 2.0) || !coef.is_finite() || coef.norm() == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "power-R equation needs power in (0, 2] and finite nonzero coefficient, got ({coef}, {power})"
        )));
    }
    Ok(PowerEquation { coef, power })
}

/// Cauchy transform `G(z)` of the law with `R(z) = coef * z^{power-1}`.
///
/// Requires `Im z > 0`; the result satisfies `Im G < 0` and
/// `|coef G^{power-1} + 1/G - z|` below `1e-12` relative to `max(1, |z|, |1/G|)`.
pub fn cauchy_power_r(coef: Complex64, power: f64, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Cauchy transform needs Im z > 0, got {z}"
        )));
    }
    let eq = checked(coef, power)?;
    Ok(1.0 / eq.solve(z)?)
}

/// Boundary value `G(x + i0)`.
pub fn cauchy_power_r_boundary(coef: Complex64, power: f64, x: f64) -> Result<Complex64> {
    Ok(1.0 / reciprocal_boundary(coef, power, x)?)
}

/// `1/G(x + i0)`, kept separately because `-Im G / pi = Im w / (pi |w|^2)`
/// retains full relative accuracy deep in the tails.
pub(crate) fn reciprocal_boundary(coef: Complex64, power: f64, x: f64) -> Result<Complex64> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite abscissa {x}")));
    }
    checked(coef, power)?.solve_boundary(x)
}
