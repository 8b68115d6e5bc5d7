//! Eigenvalues, singular values, and distances between distribution functions.

use std::path::Path;

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::SquareMatrix;
use crate::error::{Error, Result};
use crate::numerics::adaptive_simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    EigenvaluesComplex,
    SingularValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumValues {
    Complex(Vec<Complex64>),
    /// Sorted descending, all nonnegative.
    Real(Vec<f64>),
}

/// Pooled spectrum of `replicates` matrices of dimension `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSpectrum {
    kind: SpectrumKind,
    values: SpectrumValues,
    n: usize,
    replicates: usize,
}

/// Provenance attached to serialized spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub word: String,
    pub n: usize,
    pub seed: u64,
    pub replicates: usize,
}

impl EmpiricalSpectrum {
    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn len(&self) -> usize {
        match &self.values {
            SpectrumValues::Complex(v) => v.len(),
            SpectrumValues::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eigenvalues(&self) -> Option<&[Complex64]> {
        match &self.values {
            SpectrumValues::Complex(v) => Some(v),
            SpectrumValues::Real(_) => None,
        }
    }

    pub fn singular_values(&self) -> Option<&[f64]> {
        match &self.values {
            SpectrumValues::Real(v) => Some(v),
            SpectrumValues::Complex(_) => None,
        }
    }

    /// Concatenates spectra of one kind and dimension, in the given order.
    pub fn pool<I: IntoIterator<Item = EmpiricalSpectrum>>(parts: I) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut acc = iter
            .next()
            .ok_or_else(|| Error::InvalidParameter("nothing to pool".into()))?;
        for part in iter {
            if part.kind != acc.kind || part.n != acc.n {
                return Err(Error::InvalidParameter(
                    "pooled spectra must share kind and dimension".into(),
                ));
            }
            acc.replicates += part.replicates;
            match (&mut acc.values, part.values) {
                (SpectrumValues::Complex(a), SpectrumValues::Complex(b)) => a.extend(b),
                (SpectrumValues::Real(a), SpectrumValues::Real(b)) => a.extend(b),
                _ => unreachable!("kind tags match the value variant"),
            }
        }
        if let SpectrumValues::Real(v) = &mut acc.values {
            v.sort_by(|a, b| b.total_cmp(a));
        }
        Ok(acc)
    }

    /// CSV with columns `re, im` for eigenvalues or `s` for singular values.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        match &self.values {
            SpectrumValues::Complex(v) => {
                w.write_record(["re", "im"])?;
                for z in v {
                    w.write_record(&[format!("{:e}", z.re), format!("{:e}", z.im)])?;
                }
            }
            SpectrumValues::Real(v) => {
                w.write_record(["s"])?;
                for s in v {
                    w.write_record(&[format!("{s:e}")])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path, metadata: &SpectrumMetadata) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            metadata: &'a SpectrumMetadata,
            spectrum: &'a EmpiricalSpectrum,
        }
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &Doc { metadata, spectrum: self })?;
        Ok(())
    }
}

pub fn singular_values(m: &SquareMatrix) -> Result<EmpiricalSpectrum> {
    let mut sv = m
        .as_mat()
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(EmpiricalSpectrum {
        kind: SpectrumKind::SingularValues,
        values: SpectrumValues::Real(sv),
        n: m.n(),
        replicates: 1,
    })
}

/// Eigenvalues through the complex Schur form, whatever the field.
pub fn eigenvalues(m: &SquareMatrix) -> Result<EmpiricalSpectrum> {
    let ev = m
        .as_mat()
        .eigenvalues()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    if ev.iter().any(|z| !z.is_finite()) {
        return Err(Error::Decomposition("non-finite eigenvalue".into()));
    }
    Ok(EmpiricalSpectrum {
        kind: SpectrumKind::EigenvaluesComplex,
        values: SpectrumValues::Complex(ev),
        n: m.n(),
        replicates: 1,
    })
}

/// `[[0, F], [F*, 0]]`, whose eigenvalues are `+-s_j(F)`.
pub fn hermitize(f: &SquareMatrix) -> SquareMatrix {
    let n = f.n();
    let zero = c64::new(0.0, 0.0);
    let mat = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => f.get(i, j - n),
        (false, true) => f.get(j, i - n).conj(),
        _ => zero,
    });
    SquareMatrix::from_mat(mat, f.field()).expect("block matrix is square and nonempty")
}

/// Right-continuous empirical distribution function with equal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCdf {
    points: Vec<f64>,
}

impl StepCdf {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidParameter(
                "step CDF needs a nonempty sample without NaN".into(),
            ));
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p <= x) as f64 / self.len() as f64
    }
}

fn require(spec: &EmpiricalSpectrum, kind: SpectrumKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "expected a {kind:?} spectrum, got {:?}",
            spec.kind
        )));
    }
    Ok(())
}

/// Law of `+-s` with half weight on each sign.
pub fn symmetrize(spec: &EmpiricalSpectrum) -> Result<StepCdf> {
    require(spec, SpectrumKind::SingularValues)?;
    let sv = spec.singular_values().unwrap_or_default();
    StepCdf::new(sv.iter().flat_map(|&s| [s, -s]).collect())
}

/// Law of `s^2`.
pub fn square(spec: &EmpiricalSpectrum) -> Result<StepCdf> {
    require(spec, SpectrumKind::SingularValues)?;
    StepCdf::new(spec.singular_values().unwrap_or_default().iter().map(|s| s * s).collect())
}

/// Law of `|lambda|`.
pub fn radial_cdf(spec: &EmpiricalSpectrum) -> Result<StepCdf> {
    require(spec, SpectrumKind::EigenvaluesComplex)?;
    StepCdf::new(spec.eigenvalues().unwrap_or_default().iter().map(|z| z.norm()).collect())
}

/// Law of `arg lambda` in `(-pi, pi]`.
pub fn angular_cdf(spec: &EmpiricalSpectrum) -> Result<StepCdf> {
    require(spec, SpectrumKind::EigenvaluesComplex)?;
    StepCdf::new(spec.eigenvalues().unwrap_or_default().iter().map(|z| z.arg()).collect())
}

/// Sup distance to a continuous distribution function, evaluated exactly at
/// the jumps through both one-sided limits.
pub fn ks_distance<F: Fn(f64) -> f64>(emp: &StepCdf, cdf: F) -> f64 {
    let n = emp.len() as f64;
    emp.points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// [`ks_distance`] for fallible distribution functions.
pub fn try_ks_distance<F: Fn(f64) -> Result<f64>>(emp: &StepCdf, cdf: F) -> Result<f64> {
    let values = emp.points.iter().map(|&x| cdf(x)).collect::<Result<Vec<f64>>>()?;
    let n = emp.len() as f64;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i as f64 + 1.0) / n - f).max(f - i as f64 / n))
        .fold(0.0, f64::max))
}

/// Sup distance between two step functions, with ties merged.
pub fn two_sample_ks(a: &StepCdf, b: &StepCdf) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.points.len() || j < b.points.len() {
        let x = match (a.points.get(i), b.points.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => break,
        };
        while i < a.points.len() && a.points[i] <= x {
            i += 1;
        }
        while j < b.points.len() && b.points[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// `int_lo^hi |F_emp - F|`. Restricted to a window because heavy-tailed
/// laws may lack a first moment.
pub fn wasserstein1<F: Fn(f64) -> f64>(emp: &StepCdf, cdf: F, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let mut breaks = vec![lo];
    breaks.extend(emp.points.iter().copied().filter(|&x| x > lo && x < hi));
    breaks.push(hi);
    breaks.dedup();
    let tol = 1e-9 / breaks.len() as f64;
    breaks
        .windows(2)
        .map(|w| {
            let level = emp.eval(0.5 * (w[0] + w[1]));
            adaptive_simpson(|x| (level - cdf(x)).abs(), w[0], w[1], tol)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_girko, EntryDistribution, Field};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    fn sorted_complex(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn singular_value_examples() {
        let d = SquareMatrix::diagonal(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let s = singular_values(&d).unwrap();
        let sv = s.singular_values().unwrap();
        for (got, want) in sv.iter().zip([3.0, 2.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-13);
        }
        let nil = SquareMatrix::from_real_rows(2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        let sv = singular_values(&nil).unwrap();
        assert_abs_diff_eq!(sv.singular_values().unwrap()[0], 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(sv.singular_values().unwrap()[1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn eigenvalue_examples() {
        let d = SquareMatrix::diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]);
        let ev = sorted_complex(eigenvalues(&d).unwrap().eigenvalues().unwrap().to_vec());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-13);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-13);
        let nil = SquareMatrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        for z in eigenvalues(&nil).unwrap().eigenvalues().unwrap() {
            assert!(z.norm() < 1e-13);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let m = sample_girko(40, EntryDistribution::GaussianReal, &mut rng);
        let sum: Complex64 = eigenvalues(&m).unwrap().eigenvalues().unwrap().iter().sum();
        assert!((sum - m.trace()).norm() < 1e-8 * 40.0 * m.max_abs());
    }

    #[test]
    fn hermitization_spectrum() {
        let ev = |m: &SquareMatrix| {
            let mut v: Vec<f64> = eigenvalues(&hermitize(m))
                .unwrap()
                .eigenvalues()
                .unwrap()
                .iter()
                .map(|z| z.re)
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let two = ev(&SquareMatrix::from_real_rows(1, &[2.0]).unwrap());
        assert_abs_diff_eq!(two[0], -2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(two[1], 2.0, epsilon = 1e-13);
        let id = ev(&SquareMatrix::identity(2));
        for (got, want) in id.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-13);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let f = sample_girko(16, EntryDistribution::GaussianComplex, &mut rng);
        assert_eq!(hermitize(&f).field(), Field::Complex);
        let mut abs: Vec<f64> = ev(&f).iter().map(|x| x.abs()).collect();
        abs.sort_by(|a, b| b.total_cmp(a));
        let sv = singular_values(&f).unwrap();
        for (k, s) in sv.singular_values().unwrap().iter().enumerate() {
            assert!((abs[2 * k] - s).abs() < 1e-9);
            assert!((abs[2 * k + 1] - s).abs() < 1e-9);
        }
        let sym = ev(&f);
        for k in 0..sym.len() {
            assert!((sym[k] + sym[sym.len() - 1 - k]).abs() < 1e-9);
        }
    }

    #[test]
    fn views_of_singular_values() {
        let spec = singular_values(&SquareMatrix::identity(1)).unwrap();
        let sym = symmetrize(&spec).unwrap();
        assert_eq!(sym.eval(-1.0), 0.5);
        assert_eq!(sym.eval(0.0), 0.5);
        assert_eq!(sym.eval(1.0), 1.0);
        let d = SquareMatrix::diagonal(&[c(2.0, 0.0), c(3.0, 0.0)]);
        let sq = square(&singular_values(&d).unwrap()).unwrap();
        assert_abs_diff_eq!(sq.points()[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sq.points()[1], 9.0, epsilon = 1e-12);
        let d_spec = singular_values(&d).unwrap();
        let from_sym: Vec<f64> = symmetrize(&d_spec)
            .unwrap()
            .points()
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|x| x * x)
            .collect();
        assert_eq!(from_sym, sq.points());
        assert!(radial_cdf(&d_spec).is_err());
    }

    #[test]
    fn radial_examples() {
        let spec = eigenvalues(&SquareMatrix::diagonal(&[c(0.0, 1.0), c(0.0, -1.0)])).unwrap();
        let r = radial_cdf(&spec).unwrap();
        assert_eq!(r.eval(0.999), 0.0);
        assert_eq!(r.eval(1.0 + 1e-12), 1.0);
        let zero = eigenvalues(&SquareMatrix::diagonal(&[c(0.0, 0.0)])).unwrap();
        assert_eq!(radial_cdf(&zero).unwrap().eval(0.0), 1.0);
    }

    #[test]
    fn ks_examples() {
        let a = StepCdf::new(vec![0.1, 0.4, 0.4, 0.9]).unwrap();
        assert_eq!(two_sample_ks(&a, &a.clone()), 0.0);
        let single = StepCdf::new(vec![0.5]).unwrap();
        assert_abs_diff_eq!(ks_distance(&single, |r| r.clamp(0.0, 1.0)), 0.5, epsilon = 1e-15);
        let pair = StepCdf::new(vec![0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(ks_distance(&pair, |r| r.clamp(0.0, 1.0)), 0.25, epsilon = 1e-15);
        let b = StepCdf::new(vec![0.5, 0.6]).unwrap();
        let c = StepCdf::new(vec![0.1, 0.2]).unwrap();
        assert_eq!(two_sample_ks(&b, &c), 1.0);
    }

    #[test]
    fn wasserstein_of_point_mass() {
        // |1{x >= 0.5} - x| on [0, 1] integrates to 1/4
        let single = StepCdf::new(vec![0.5]).unwrap();
        let w = wasserstein1(&single, |x| x.clamp(0.0, 1.0), 0.0, 1.0);
        assert_abs_diff_eq!(w, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn pooling() {
        let a = singular_values(&SquareMatrix::diagonal(&[c(1.0, 0.0), c(5.0, 0.0)])).unwrap();
        let b = singular_values(&SquareMatrix::diagonal(&[c(3.0, 0.0), c(2.0, 0.0)])).unwrap();
        let pooled = EmpiricalSpectrum::pool([a, b]).unwrap();
        assert_eq!(pooled.replicates(), 2);
        let sv = pooled.singular_values().unwrap();
        assert!(sv.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(sv.len(), 4);
        let e = eigenvalues(&SquareMatrix::identity(2)).unwrap();
        assert!(EmpiricalSpectrum::pool([pooled, e]).is_err());
    }
}
