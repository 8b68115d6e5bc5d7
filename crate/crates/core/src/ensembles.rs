//! Random matrix ensembles: Girko–Ginibre factors, matrix words built from
//! them, Haar unitaries, and the diagonal stable model `Y T U*`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat, Side};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Domain, StreamId};
use crate::transforms::XiQuantiles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    Real,
    Complex,
}

/// Dense `n x n` complex matrix; real-field matrices keep zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    mat: Mat<c64>,
    field: Field,
}

impl SquareMatrix {
    pub fn from_mat(mat: Mat<c64>, field: Field) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "expected a nonempty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let mut m = Self { mat, field };
        m.enforce_field();
        Ok(m)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(n: usize, entries: &[c64], field: Field) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "{} entries do not fill a {n}x{n} matrix",
                entries.len()
            )));
        }
        Self::from_mat(Mat::from_fn(n, n, |i, j| entries[i * n + j]), field)
    }

    pub fn from_real_rows(n: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<c64> = entries.iter().map(|&x| c64::new(x, 0.0)).collect();
        Self::from_rows(n, &c, Field::Real)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: Mat::identity(n, n),
            field: Field::Real,
        }
    }

    pub fn diagonal(values: &[c64]) -> Self {
        let n = values.len();
        let field = if values.iter().all(|v| v.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        };
        Self {
            mat: Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { c64::new(0.0, 0.0) }),
            field,
        }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.mat
    }

    fn enforce_field(&mut self) {
        if self.field == Field::Real {
            let n = self.n();
            for j in 0..n {
                for i in 0..n {
                    self.mat[(i, j)].im = 0.0;
                }
            }
        }
    }

    fn joint_field(&self, other: &Self) -> Field {
        if self.field == Field::Real && other.field == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::InvalidParameter(format!(
                "dimension mismatch: {} vs {}",
                self.n(),
                other.n()
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        Ok(Self {
            mat: &self.mat * &other.mat,
            field: self.joint_field(other),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
            field: self.joint_field(other),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let n = self.n();
        Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] * c),
            field: self.field,
        }
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: c64) -> Self {
        let mut mat = self.mat.clone();
        for i in 0..self.n() {
            mat[(i, i)] -= shift;
        }
        let field = if shift.im == 0.0 { self.field } else { Field::Complex };
        Self { mat, field }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint().to_owned(),
            field: self.field,
        }
    }

    pub fn trace(&self) -> c64 {
        (0..self.n()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.mat[(i, j)].norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.n().min(other.n());
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.mat[(i, j)] - other.mat[(i, j)]).norm())
            .fold(0.0, f64::max)
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<c64> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.mat[(i, j)])
            .collect()
    }
}

/// Entry laws, each centred with `E|X|^2 = 1` and, for complex kinds,
/// `E X^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryDistribution {
    GaussianReal,
    GaussianComplex,
    Rademacher,
    UniformSymmetric,
    CenteredExponential,
    BernoulliPmComplex,
}

impl EntryDistribution {
    pub const ALL: [EntryDistribution; 6] = [
        EntryDistribution::GaussianReal,
        EntryDistribution::GaussianComplex,
        EntryDistribution::Rademacher,
        EntryDistribution::UniformSymmetric,
        EntryDistribution::CenteredExponential,
        EntryDistribution::BernoulliPmComplex,
    ];

    pub fn field(&self) -> Field {
        match self {
            EntryDistribution::GaussianComplex | EntryDistribution::BernoulliPmComplex => {
                Field::Complex
            }
            _ => Field::Real,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> c64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            EntryDistribution::GaussianReal => c64::new(StandardNormal.sample(rng), 0.0),
            EntryDistribution::GaussianComplex => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                c64::new(re * h, im * h)
            }
            EntryDistribution::Rademacher => {
                c64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
            }
            EntryDistribution::UniformSymmetric => {
                let s = 3f64.sqrt();
                c64::new(rng.random_range(-s..s), 0.0)
            }
            EntryDistribution::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                c64::new(e - 1.0, 0.0)
            }
            EntryDistribution::BernoulliPmComplex => {
                let re = if rng.random::<bool>() { h } else { -h };
                let im = if rng.random::<bool>() { h } else { -h };
                c64::new(re, im)
            }
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EntryDistribution::GaussianReal => "gaussian-real",
            EntryDistribution::GaussianComplex => "gaussian-complex",
            EntryDistribution::Rademacher => "rademacher",
            EntryDistribution::UniformSymmetric => "uniform-symmetric",
            EntryDistribution::CenteredExponential => "centered-exponential",
            EntryDistribution::BernoulliPmComplex => "bernoulli-pm-complex",
        };
        f.write_str(name)
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EntryDistribution::ALL
            .into_iter()
            .find(|d| d.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown entry distribution {s:?}")))
    }
}

/// Girko–Ginibre matrix: i.i.d. entries of `dist` scaled by `1/sqrt(n)`,
/// drawn in row-major order.
pub fn sample_girko<R: Rng + ?Sized>(n: usize, dist: EntryDistribution, rng: &mut R) -> SquareMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    let entries: Vec<c64> = (0..n * n).map(|_| dist.sample(rng) * scale).collect();
    SquareMatrix {
        mat: Mat::from_fn(n, n, |i, j| entries[i * n + j]),
        field: dist.field(),
    }
}

/// `(Z* Z + t I)^{-1} Z*`; the exact inverse when `t = 0`.
///
/// At `t = 0` the inversion is refused when `s_min < n^{-8} s_max`.
pub fn regularized_inverse(z: &SquareMatrix, t: f64, factor_id: usize) -> Result<SquareMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "regularization must be finite and nonnegative, got {t}"
        )));
    }
    let n = z.n();
    let mat = if t == 0.0 {
        let sv = z
            .mat
            .singular_values()
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let (s_max, s_min) = (sv[0], sv[n - 1]);
        let ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };
        if !(ratio >= (n as f64).powi(-8)) {
            return Err(Error::SingularAtZero { factor_id, ratio });
        }
        z.mat.partial_piv_lu().inverse()
    } else {
        let zh = z.mat.adjoint().to_owned();
        let mut gram = &zh * &z.mat;
        for i in 0..n {
            gram[(i, i)] += c64::new(t, 0.0);
        }
        let llt = gram
            .llt(Side::Lower)
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        llt.solve(&zh)
    };
    SquareMatrix::from_mat(mat, z.field)
}

/// One factor `X_id^{exponent * power}` of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub id: u32,
    /// `+1` or `-1`.
    pub exponent: i8,
    pub power: u32,
}

/// A product of independent factors, summed over `summands` independent copies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WordRepr", into = "WordRepr")]
pub struct MatrixWord {
    factors: Vec<Factor>,
    summands: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum WordRepr {
    Full { factors: String, summands: u32 },
    Text(String),
}

impl TryFrom<WordRepr> for MatrixWord {
    type Error = Error;

    fn try_from(repr: WordRepr) -> Result<Self> {
        match repr {
            WordRepr::Text(s) => s.parse(),
            WordRepr::Full { factors, summands } => factors.parse::<MatrixWord>()?.with_summands(summands),
        }
    }
}

impl From<MatrixWord> for WordRepr {
    fn from(w: MatrixWord) -> Self {
        WordRepr::Full {
            factors: w.to_string(),
            summands: w.summands,
        }
    }
}

impl MatrixWord {
    pub fn new(factors: Vec<Factor>, summands: u32) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidWord("a word needs at least one factor".into()));
        }
        if summands == 0 {
            return Err(Error::InvalidWord("summand count must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        for f in &factors {
            if f.power == 0 || !(f.exponent == 1 || f.exponent == -1) {
                return Err(Error::InvalidWord(format!(
                    "factor X{} needs exponent +-1 and power >= 1",
                    f.id
                )));
            }
            if !seen.insert(f.id) {
                return Err(Error::InvalidWord(format!("factor id {} repeats", f.id)));
            }
        }
        Ok(Self { factors, summands })
    }

    /// `X_0 X_1^{-1} ... X_l^{-1}`, the product with `l` distinct inverse factors.
    pub fn product_with_inverses(l: u32) -> Self {
        let mut factors = vec![Factor {
            id: 0,
            exponent: 1,
            power: 1,
        }];
        factors.extend((1..=l).map(|id| Factor {
            id,
            exponent: -1,
            power: 1,
        }));
        Self { factors, summands: 1 }
    }

    /// `X_0 X_1^{-p_1} X_2^{-p_2} ...`.
    pub fn with_inverse_powers(powers: &[u32]) -> Result<Self> {
        let mut factors = vec![Factor {
            id: 0,
            exponent: 1,
            power: 1,
        }];
        for (k, &p) in powers.iter().enumerate() {
            factors.push(Factor {
                id: k as u32 + 1,
                exponent: -1,
                power: p,
            });
        }
        Self::new(factors, 1)
    }

    pub fn with_summands(mut self, summands: u32) -> Result<Self> {
        if summands == 0 {
            return Err(Error::InvalidWord("summand count must be at least 1".into()));
        }
        self.summands = summands;
        Ok(self)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn summands(&self) -> u32 {
        self.summands
    }

    /// Total power of inverse factors, `l`.
    pub fn inverse_power(&self) -> u32 {
        self.factors
            .iter()
            .filter(|f| f.exponent < 0)
            .map(|f| f.power)
            .sum()
    }

    pub fn forward_power(&self) -> u32 {
        self.factors
            .iter()
            .filter(|f| f.exponent > 0)
            .map(|f| f.power)
            .sum()
    }

    /// `2/(l+1)` when the word has exactly one forward factor, of power one.
    pub fn stable_index(&self) -> Option<f64> {
        let forward: Vec<_> = self.factors.iter().filter(|f| f.exponent > 0).collect();
        (forward.len() == 1 && forward[0].power == 1)
            .then(|| 2.0 / (self.inverse_power() as f64 + 1.0))
    }

    /// Number of stream ids one summand occupies.
    fn stride(&self) -> u64 {
        self.factors.iter().map(|f| f.id as u64).max().unwrap_or(0) + 1
    }
}

impl fmt::Display for MatrixWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, factor) in self.factors.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            let e = factor.exponent as i64 * factor.power as i64;
            if e == 1 {
                write!(f, "X{}", factor.id)?;
            } else {
                write!(f, "X{}^{}", factor.id, e)?;
            }
        }
        Ok(())
    }
}

impl FromStr for MatrixWord {
    type Err = Error;

    /// Grammar: factors `X<id>` or `X<id>^<nonzero int>`, separated by
    /// whitespace or `*`.
    fn from_str(s: &str) -> Result<Self> {
        let mut factors = Vec::new();
        for token in s.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
            let bad = || Error::InvalidWord(format!("cannot parse factor {token:?} in {s:?}"));
            let body = token.strip_prefix('X').ok_or_else(bad)?;
            let (id, exp) = match body.split_once('^') {
                Some((id, exp)) => (id, exp.parse::<i64>().map_err(|_| bad())?),
                None => (body, 1),
            };
            let id = id.parse::<u32>().map_err(|_| bad())?;
            if exp == 0 || exp.unsigned_abs() > u32::MAX as u64 {
                return Err(bad());
            }
            factors.push(Factor {
                id,
                exponent: exp.signum() as i8,
                power: exp.unsigned_abs() as u32,
            });
        }
        Self::new(factors, 1)
    }
}

/// `sum_q prod_r (X^{(q, id_r)})_t^{exponent_r * power_r}`.
///
/// `sample_factor` receives the global factor index `q * stride + id` and
/// must return an independent `n x n` draw for each index.
pub fn assemble_word<S>(word: &MatrixWord, t: f64, mut sample_factor: S) -> Result<SquareMatrix>
where
    S: FnMut(u64) -> SquareMatrix,
{
    let stride = word.stride();
    let mut total: Option<SquareMatrix> = None;
    for q in 0..word.summands as u64 {
        let mut product: Option<SquareMatrix> = None;
        for f in &word.factors {
            let x = sample_factor(q * stride + f.id as u64);
            let base = if f.exponent < 0 {
                regularized_inverse(&x, t, f.id as usize)?
            } else {
                x
            };
            let mut powered = base.clone();
            for _ in 1..f.power {
                powered = powered.matmul(&base)?;
            }
            product = Some(match product {
                None => powered,
                Some(p) => p.matmul(&powered)?,
            });
        }
        let product = product.expect("words have at least one factor");
        total = Some(match total {
            None => product,
            Some(acc) => acc.add(&product)?,
        });
    }
    Ok(total.expect("words have at least one summand"))
}

/// Samples `word` with Girko–Ginibre factors of law `dist`, each factor on
/// its own stream under `(master, replicate)`.
pub fn sample_word(
    word: &MatrixWord,
    n: usize,
    dist: EntryDistribution,
    t: f64,
    master: u64,
    replicate: u64,
) -> Result<SquareMatrix> {
    assemble_word(word, t, |gid| {
        let mut rng = StreamId::new(master, replicate, gid).rng(Domain::Factor);
        sample_girko(n, dist, &mut rng)
    })
}

/// Haar unitary via QR of a complex Ginibre matrix, with the phases of the
/// triangular diagonal moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix {
    let g = sample_girko(n, EntryDistribution::GaussianComplex, rng);
    let qr = g.mat.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<c64> = (0..n)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c64::new(1.0, 0.0)
            }
        })
        .collect();
    SquareMatrix {
        mat: Mat::from_fn(n, n, |i, j| q[(i, j)] * phases[j]),
        field: Field::Complex,
    }
}

/// The model `Y T U*` with `Y` complex Ginibre, `U` Haar, and `T` diagonal
/// with entries `G^{-1}(j/(n+1))`, `G` the distribution function of `|xi|`.
#[derive(Debug, Clone)]
pub struct StableModel {
    alpha: f64,
    diagonal: Vec<f64>,
}

impl StableModel {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let quantiles = XiQuantiles::new(alpha)?;
        let diagonal = (1..=n)
            .map(|j| quantiles.quantile_abs(j as f64 / (n as f64 + 1.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha, diagonal })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn sample(&self, master: u64, replicate: u64) -> SquareMatrix {
        let n = self.n();
        let mut y_rng = StreamId::new(master, replicate, 0).rng(Domain::Model);
        let y = sample_girko(n, EntryDistribution::GaussianComplex, &mut y_rng);
        let mut u_rng = StreamId::new(master, replicate, 1).rng(Domain::Haar);
        let u = sample_haar_unitary(n, &mut u_rng);
        let yt = Mat::from_fn(n, n, |i, j| y.mat[(i, j)] * self.diagonal[j]);
        SquareMatrix {
            mat: &yt * u.mat.adjoint(),
            field: Field::Complex,
        }
    }
}

/// One draw of the stable model; tabulates the `xi^2` law on every call.
pub fn sample_stable_model(n: usize, alpha: f64, master: u64, replicate: u64) -> Result<SquareMatrix> {
    Ok(StableModel::new(alpha, n)?.sample(master, replicate))
}
