//! Densities, distribution functions and quantiles of power-R laws.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::cauchy::reciprocal_boundary;
use super::stable::{stable_b, StableLaw};
use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, adaptive_simpson_with_ends, bisect_increasing};

/// Node spacing of density tables in the stretched variable.
const TABLE_STEP: f64 = 0.02;
const QUADRATURE_TOL: f64 = 1e-8;
/// Largest tabulated abscissa in units of the law's scale.
const EXTENT_CAP: f64 = 1e150;

/// Density of `law` at `x`, obtained from the boundary value of its Cauchy
/// transform: `-Im G(x + i0) / pi`.
pub fn stable_density(law: &StableLaw, x: f64) -> Result<f64> {
    let (unit, scale) = law.normalized();
    if let Some(edge) = law.support_lower_edge() {
        if x <= edge {
            return Ok(0.0);
        }
    }
    let w = reciprocal_boundary(unit, law.index(), x / scale)?;
    Ok((w.im / (PI * w.norm_sqr())).max(0.0) / scale)
}

/// Coordinates in which tables and quadratures are laid out.
///
/// Two-sided laws use `x = scale * sinh(s)`; laws on a half-line use
/// `x = edge + scale * sinh(s)^2`, which also smooths the square-root
/// behaviour at the edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mapping", rename_all = "kebab-case")]
enum Stretch {
    TwoSided { scale: f64 },
    HalfLine { edge: f64, scale: f64 },
}

impl Stretch {
    fn for_law(law: &StableLaw) -> Self {
        let (_, scale) = law.normalized();
        match law.support_lower_edge() {
            Some(edge) => Stretch::HalfLine { edge, scale },
            None => Stretch::TwoSided { scale },
        }
    }

    fn x(&self, s: f64) -> f64 {
        match *self {
            Stretch::TwoSided { scale } => scale * s.sinh(),
            Stretch::HalfLine { edge, scale } => edge + scale * s.sinh().powi(2),
        }
    }

    fn dx(&self, s: f64) -> f64 {
        match *self {
            Stretch::TwoSided { scale } => scale * s.cosh(),
            Stretch::HalfLine { scale, .. } => scale * (2.0 * s).sinh(),
        }
    }

    /// Inverse map; `None` left of a half-line edge.
    fn s(&self, x: f64) -> Option<f64> {
        match *self {
            Stretch::TwoSided { scale } => Some((x / scale).asinh()),
            Stretch::HalfLine { edge, scale } => {
                (x > edge).then(|| ((x - edge) / scale).sqrt().asinh())
            }
        }
    }
}

fn stretched_density(law: &StableLaw, stretch: Stretch, s: f64) -> Result<f64> {
    Ok(stable_density(law, stretch.x(s))? * stretch.dx(s))
}

/// Distribution function of `law` at `x` by adaptive quadrature of the density.
///
/// Symmetric laws integrate from the origin, half-line laws from the support
/// edge; any other law goes through a [`DensityTable`].
pub fn stable_cdf(law: &StableLaw, x: f64) -> Result<f64> {
    let stretch = Stretch::for_law(law);
    let integrate = |upper: f64| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let v = adaptive_simpson(
            |s| {
                stretched_density(law, stretch, s).unwrap_or_else(|e| {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                })
            },
            0.0,
            upper,
            QUADRATURE_TOL * 0.1,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };
    match stretch {
        Stretch::HalfLine { .. } => match stretch.s(x) {
            None => Ok(0.0),
            Some(s) => Ok(integrate(s)?.min(1.0)),
        },
        Stretch::TwoSided { .. } if law.is_symmetric() => {
            let half = integrate(stretch.s(x.abs()).unwrap_or(0.0))?;
            Ok((0.5 + x.signum() * half).clamp(0.0, 1.0))
        }
        Stretch::TwoSided { .. } => Ok(DensityTable::new(*law)?.cdf(x)),
    }
}

/// `u`-quantile of `law`; builds a fresh table, so callers needing many
/// quantiles should hold a [`DensityTable`] instead.
pub fn quantile(law: &StableLaw, u: f64) -> Result<f64> {
    DensityTable::new(*law)?.quantile(u)
}

/// Tabulated density and distribution function on a uniform grid in the
/// stretched variable, with analytic power-law tails beyond the grid.
#[derive(Debug, Clone, Serialize)]
pub struct DensityTable {
    law: StableLaw,
    stretch: Stretch,
    s_first: f64,
    step: f64,
    /// Tail density decays like `|x|^tail_exponent`.
    pub tail_exponent: f64,
    x: Vec<f64>,
    pdf: Vec<f64>,
    /// Density in the stretched variable, used for Hermite interpolation.
    stretched: Vec<f64>,
    cdf: Vec<f64>,
    left_tail: f64,
    right_tail: f64,
}

impl DensityTable {
    pub fn new(law: StableLaw) -> Result<Self> {
        let stretch = Stretch::for_law(&law);
        let p = law.index();
        let extent = 10f64.powf(6.0 / p).min(EXTENT_CAP);
        let (s_first, s_last) = match stretch {
            Stretch::TwoSided { .. } => (-extent.asinh(), extent.asinh()),
            Stretch::HalfLine { .. } => (0.0, extent.sqrt().asinh()),
        };
        // Even interval count, so composite Simpson applies to node sums.
        let mut intervals = ((s_last - s_first) / TABLE_STEP).ceil() as usize;
        intervals += intervals % 2;
        let step = (s_last - s_first) / intervals as f64;
        let nodes: Vec<f64> = (0..=intervals).map(|i| s_first + step * i as f64).collect();

        let stretched = nodes
            .par_iter()
            .map(|&s| stretched_density(&law, stretch, s))
            .collect::<Result<Vec<f64>>>()?;
        let tol = QUADRATURE_TOL * step / (s_last - s_first);
        let pieces = (0..intervals)
            .into_par_iter()
            .map(|i| {
                let failure = std::sync::Mutex::new(None);
                let v = adaptive_simpson_with_ends(
                    |s| {
                        stretched_density(&law, stretch, s).unwrap_or_else(|e| {
                            failure.lock().unwrap().get_or_insert(e);
                            0.0
                        })
                    },
                    nodes[i],
                    nodes[i + 1],
                    stretched[i],
                    stretched[i + 1],
                    tol,
                );
                match failure.into_inner().unwrap() {
                    Some(e) => Err(e),
                    None => Ok(v.max(0.0)),
                }
            })
            .collect::<Result<Vec<f64>>>()?;

        let x: Vec<f64> = nodes.iter().map(|&s| stretch.x(s)).collect();
        let pdf: Vec<f64> = nodes
            .iter()
            .zip(&stretched)
            .map(|(&s, &g)| g / stretch.dx(s).max(f64::MIN_POSITIVE))
            .collect();
        let tail_mass = |i: usize| pdf[i] * x[i].abs() / p;
        let left_tail = match stretch {
            Stretch::TwoSided { .. } => tail_mass(0),
            Stretch::HalfLine { .. } => 0.0,
        };
        let right_tail = tail_mass(intervals);
        let mut cdf = Vec::with_capacity(nodes.len());
        let mut acc = left_tail;
        cdf.push(acc);
        for piece in pieces {
            acc += piece;
            cdf.push(acc);
        }
        let table = Self {
            law,
            stretch,
            s_first,
            step,
            tail_exponent: -p - 1.0,
            x,
            pdf,
            stretched,
            cdf,
            left_tail,
            right_tail,
        };
        let defect = (table.total_mass() - 1.0).abs();
        if defect > 1e-4 {
            return Err(Error::NoConvergence { residual: defect });
        }
        Ok(table)
    }

    pub fn law(&self) -> &StableLaw {
        &self.law
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.x
    }

    pub fn densities(&self) -> &[f64] {
        &self.pdf
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cdf
    }

    /// Grid mass plus both analytic tails.
    pub fn total_mass(&self) -> f64 {
        self.cdf[self.cdf.len() - 1] + self.right_tail
    }

    fn hermite(&self, i: usize, t: f64) -> f64 {
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.cdf[i]
            + h10 * self.step * self.stretched[i]
            + h01 * self.cdf[i + 1]
            + h11 * self.step * self.stretched[i + 1]
    }

    fn cdf_at_s(&self, s: f64) -> f64 {
        let last = self.cdf.len() - 1;
        let pos = ((s - self.s_first) / self.step).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        self.hermite(i, pos - i as f64)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let last = self.x.len() - 1;
        let p = self.law.index();
        if x > self.x[last] {
            return (1.0 - self.right_tail * (x / self.x[last]).powf(-p)).min(1.0);
        }
        if x < self.x[0] {
            return match self.stretch {
                Stretch::TwoSided { .. } => self.left_tail * (x / self.x[0]).powf(-p),
                Stretch::HalfLine { .. } => 0.0,
            };
        }
        match self.stretch.s(x) {
            Some(s) => self.cdf_at_s(s).clamp(0.0, 1.0),
            None => 0.0,
        }
    }

    /// Inverse of the tabulated distribution function.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must lie in (0, 1), got {u}"
            )));
        }
        let last = self.cdf.len() - 1;
        if u > self.cdf[last] {
            return Err(Error::QuantileOutOfRange {
                u,
                mass: self.cdf[last],
            });
        }
        if u < self.cdf[0] {
            return Err(Error::QuantileOutOfRange {
                u,
                mass: self.cdf[0],
            });
        }
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, last) - 1;
        let t = bisect_increasing(|t| self.hermite(i, t) - u, 0.0, 1.0);
        Ok(self.stretch.x(self.s_first + self.step * (i as f64 + t)))
    }

    /// Numerical S-transform at real `z` in `(-1, 0)`, via the moment
    /// generating function `psi(u) = int u x / (1 - u x) dmu(x)` on `u < 0`.
    /// Only defined for laws on a half-line.
    pub fn s_transform(&self, z: f64) -> Result<f64> {
        if !matches!(self.stretch, Stretch::HalfLine { .. }) {
            return Err(Error::InvalidParameter(
                "numerical S-transform needs a law on a half-line".into(),
            ));
        }
        if !(z > -1.0 && z < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "S-transform evaluated on (-1, 0) only, got {z}"
            )));
        }
        let moment = |u: f64| -> f64 {
            let nodes = self.x.len();
            let body: f64 = (0..nodes)
                .map(|i| {
                    let weight = if i == 0 || i == nodes - 1 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    let ux = u * self.x[i];
                    weight * self.stretched[i] * ux / (1.0 - ux)
                })
                .sum::<f64>()
                * self.step
                / 3.0;
            let ux = u * self.x[nodes - 1];
            body + self.right_tail * ux / (1.0 - ux)
        };
        // moment is decreasing in ln(-u)
        let log_u = bisect_increasing(|t| z - moment(-t.exp()), -80.0, 80.0);
        let chi = -log_u.exp();
        Ok(chi * (1.0 + z) / z)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "pdf", "cdf"])?;
        for i in 0..self.x.len() {
            w.write_record(&[
                format!("{:e}", self.x[i]),
                format!("{:e}", self.pdf[i]),
                format!("{:e}", self.cdf[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The law of `xi^2` for the diagonal matrix model of index `alpha`:
/// R-transform `b(alpha) z^{alpha/2 - 1}`.
pub fn xi_squared_law(alpha: f64) -> Result<StableLaw> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "matrix model index must lie in (0, 2), got {alpha}"
        )));
    }
    StableLaw::power_r(stable_b(alpha), alpha / 2.0)
}

/// Quantiles of `|xi|` backed by one tabulated `xi^2` law.
#[derive(Debug, Clone)]
pub struct XiQuantiles {
    alpha: f64,
    table: DensityTable,
}

impl XiQuantiles {
    pub fn new(alpha: f64) -> Result<Self> {
        let table = DensityTable::new(xi_squared_law(alpha)?)?;
        Ok(Self { alpha, table })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn table(&self) -> &DensityTable {
        &self.table
    }

    pub fn quantile_abs(&self, u: f64) -> Result<f64> {
        Ok(self.table.quantile(u)?.sqrt())
    }
}

/// `u`-quantile of `|xi|`; tabulates the `xi^2` law on every call.
pub fn quantile_abs_xi(alpha: f64, u: f64) -> Result<f64> {
    XiQuantiles::new(alpha)?.quantile_abs(u)
}

/// Reference value of the target S-transform `z^{1/p - 1} / c^{1/p}` for
/// comparison with [`DensityTable::s_transform`].
pub fn s_target(law: &StableLaw, z: f64) -> Result<Complex64> {
    super::stable::s_stable(law, Complex64::new(z, 0.0))
}
