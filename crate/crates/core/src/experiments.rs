//! Monte Carlo checks of limiting spectral laws.
//!
//! Every experiment draws one or more *samples* (a matrix word or the stable
//! model), pools their spectra over replicates and compares the pooled
//! distribution functions with each other or with an analytic law.
//!
//! Replicate `r` of sample `k` draws from streams keyed by
//! `(seed, (k << 32) | r, factor)`, so samples never share randomness and
//! results do not depend on scheduling.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_word, EntryDistribution, MatrixWord, SquareMatrix, StableModel};
use crate::error::{Error, Result};
use crate::limits::{oplus_stable, LimitLaw};
use crate::spectra::{
    angular_cdf, eigenvalues, radial_cdf, singular_values, square, symmetrize, try_ks_distance,
    two_sample_ks, wasserstein1, EmpiricalSpectrum, SpectrumKind, StepCdf,
};
use crate::transforms::{mp_cdf, DensityTable, StableLaw};

pub const SCHEMA_VERSION: u32 = 1;
/// Upper end of the window for radial Wasserstein distances.
const W1_WINDOW: f64 = 10.0;

fn default_dist() -> EntryDistribution {
    EntryDistribution::GaussianComplex
}

fn default_summands() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Radial ESD of one word against `H(sigma_s(2/(l+1)))`.
    LawCheck {
        word: MatrixWord,
        #[serde(default = "default_dist")]
        dist: EntryDistribution,
    },
    /// `F^(0)` against `m^{-(l+1)/2}(F^(1) + ... + F^(m))`.
    Stability {
        l: u32,
        m: u32,
        #[serde(default = "default_dist")]
        dist: EntryDistribution,
    },
    /// Powered inverses `X_0 X_1^{-l_1} ...` against distinct inverses.
    PowerStability {
        powers: Vec<u32>,
        #[serde(default = "default_summands")]
        m: u32,
        #[serde(default = "default_dist")]
        dist: EntryDistribution,
    },
    /// Pairwise comparison of one word under several entry laws.
    Universality {
        word: MatrixWord,
        dists: Vec<EntryDistribution>,
    },
    /// The diagonal model `Y T U*`.
    MatrixModel { alpha: f64 },
    /// Singular values: Marchenko–Pastur for a single factor, symmetrized
    /// stable laws for products with inverses.
    SingularLaw {
        word: MatrixWord,
        #[serde(default = "default_dist")]
        dist: EntryDistribution,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub n: usize,
    pub replicates: usize,
    /// Regularization `t` of inverse factors; `0` inverts exactly.
    #[serde(default)]
    pub regularization: f64,
    pub experiment: Experiment,
    /// Overrides keyed by statistic name, or by the part before `:`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            n,
            replicates,
            regularization: 0.0,
            experiment,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.n < 8 {
            return bad(format!("n must be at least 8, got {}", self.n));
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return bad(format!("regularization must be >= 0, got {}", self.regularization));
        }
        match &self.experiment {
            Experiment::LawCheck { word, .. } => {
                single_summand(word)?;
                stable_word_index(word)?;
            }
            Experiment::Stability { m, .. } => {
                if *m == 0 {
                    return bad("m must be at least 1".into());
                }
            }
            Experiment::PowerStability { powers, m, .. } => {
                if powers.is_empty() || powers.contains(&0) {
                    return bad("powers must be a nonempty list of positive integers".into());
                }
                if *m == 0 {
                    return bad("m must be at least 1".into());
                }
            }
            Experiment::Universality { word, dists } => {
                if dists.is_empty() {
                    return bad("universality needs at least one entry distribution".into());
                }
                let mut seen = dists.clone();
                seen.sort_by_key(|d| d.to_string());
                seen.dedup();
                if seen.len() != dists.len() {
                    return bad("entry distributions must be distinct".into());
                }
                single_summand(word)?;
            }
            Experiment::MatrixModel { alpha } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return bad(format!("matrix model needs alpha in (0, 2), got {alpha}"));
                }
            }
            Experiment::SingularLaw { word, .. } => {
                single_summand(word)?;
                if !is_single_factor(word) {
                    stable_word_index(word)?;
                }
            }
        }
        let known = self.default_tolerances();
        for (key, value) in &self.tolerances {
            if !(*value > 0.0 && value.is_finite()) {
                return bad(format!("tolerance {key} must be positive, got {value}"));
            }
            let matches = known
                .keys()
                .any(|name| name == key || base_name(name) == key);
            if !matches {
                return bad(format!("unknown tolerance key {key:?}"));
            }
        }
        Ok(())
    }

    /// Statistic names with their default tolerances for this experiment.
    pub fn default_tolerances(&self) -> BTreeMap<String, f64> {
        let mut t = BTreeMap::new();
        match &self.experiment {
            Experiment::LawCheck { word, .. } => {
                let radial = match word.inverse_power() {
                    0 => 0.05,
                    1 => 0.06,
                    _ => 0.08,
                };
                t.insert("radial-ks".into(), radial);
                t.insert("angular-ks".into(), 0.1);
            }
            Experiment::Stability { l, .. } => {
                let one = if *l == 0 { 0.05 } else { 0.08 };
                t.insert("two-sample-ks".into(), 0.08);
                t.insert("one-sample-ks:single".into(), one);
                t.insert("one-sample-ks:sum".into(), one);
            }
            Experiment::PowerStability { m, .. } => {
                t.insert("two-sample-ks".into(), 0.10);
                t.insert("one-sample-ks:powered".into(), 0.10);
                t.insert("one-sample-ks:distinct".into(), 0.10);
                if *m > 1 {
                    t.insert("one-sample-ks:sum".into(), 0.10);
                }
            }
            Experiment::Universality { dists, .. } => {
                for (i, a) in dists.iter().enumerate() {
                    for b in &dists[i + 1..] {
                        t.insert(format!("two-sample-ks:{a}/{b}"), 0.08);
                    }
                }
            }
            Experiment::MatrixModel { alpha } => {
                let radial = if (*alpha - 1.0).abs() < 1e-12 { 0.10 } else { 0.12 };
                t.insert("radial-ks".into(), radial);
                t.insert("angular-ks".into(), 0.1);
            }
            Experiment::SingularLaw { word, .. } => {
                if is_single_factor(word) {
                    t.insert("mp-ks".into(), 0.04);
                } else {
                    t.insert("symmetrized-ks".into(), 0.08);
                }
            }
        }
        t
    }

    /// Default tolerance with overrides applied, by exact name first.
    pub fn tolerance(&self, name: &str) -> Option<f64> {
        let default = self.default_tolerances().get(name).copied()?;
        Some(
            self.tolerances
                .get(name)
                .or_else(|| self.tolerances.get(base_name(name)))
                .copied()
                .unwrap_or(default),
        )
    }
}

fn base_name(name: &str) -> &str {
    name.split(':').next().unwrap_or(name)
}

fn single_summand(word: &MatrixWord) -> Result<()> {
    if word.summands() != 1 {
        return Err(Error::InvalidParameter(format!(
            "this experiment takes a single product, got {} summands",
            word.summands()
        )));
    }
    Ok(())
}

fn stable_word_index(word: &MatrixWord) -> Result<f64> {
    word.stable_index().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "word {word} needs exactly one forward factor of power one"
        ))
    })
}

fn is_single_factor(word: &MatrixWord) -> bool {
    word.factors().len() == 1 && word.factors()[0].exponent > 0 && word.factors()[0].power == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    /// Absent for informational statistics.
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateStatistic {
    pub sample: String,
    pub replicate: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradedReplicate {
    pub sample: String,
    pub replicate: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub wall_seconds: f64,
}

/// A pooled spectrum kept for artifact output.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSpectrum {
    pub name: String,
    pub spectrum: EmpiricalSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub statistics: Vec<Statistic>,
    pub per_replicate: Vec<ReplicateStatistic>,
    pub degraded_replicates: Vec<DegradedReplicate>,
    pub pass: bool,
    pub failures: Vec<String>,
    #[serde(default)]
    pub artifacts: Vec<String>,
    pub timings: Timings,
    #[serde(skip)]
    pub spectra: Vec<NamedSpectrum>,
}

impl ExperimentReport {
    /// The report without wall-clock data; identical across reruns.
    pub fn body(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        v
    }

    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }
}

/// One summary row per statistic, for batch sweeps.
pub fn write_summary_csv(reports: &[ExperimentReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "n", "replicates", "seed", "statistic", "value", "tolerance", "pass"])?;
    for report in reports {
        let kind = serde_json::to_value(&report.config.experiment)?
            .get("kind")
            .and_then(|k| k.as_str().map(String::from))
            .unwrap_or_default();
        for s in &report.statistics {
            w.write_record(&[
                kind.clone(),
                report.config.n.to_string(),
                report.config.replicates.to_string(),
                report.config.seed.to_string(),
                s.name.clone(),
                format!("{:e}", s.value),
                s.tolerance.map(|t| t.to_string()).unwrap_or_default(),
                s.pass.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Where a sample's matrices come from.
enum Source<'a> {
    Word {
        word: &'a MatrixWord,
        dist: EntryDistribution,
        /// Multiplies every draw, e.g. the normalizer of a sum.
        factor: f64,
    },
    Model(&'a StableModel),
}

/// Pooled spectrum of one sample plus its per-replicate parts.
struct Pooled {
    name: String,
    pooled: EmpiricalSpectrum,
    parts: Vec<(usize, EmpiricalSpectrum)>,
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    statistics: Vec<Statistic>,
    per_replicate: Vec<ReplicateStatistic>,
    degraded: Vec<DegradedReplicate>,
    spectra: Vec<NamedSpectrum>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Self {
            cfg,
            statistics: Vec::new(),
            per_replicate: Vec::new(),
            degraded: Vec::new(),
            spectra: Vec::new(),
        }
    }

    fn draw(&self, source: &Source<'_>, key: u64) -> Result<SquareMatrix> {
        match source {
            Source::Word { word, dist, factor } => {
                let m = sample_word(word, self.cfg.n, *dist, self.cfg.regularization, self.cfg.seed, key)?;
                Ok(if *factor == 1.0 { m } else { m.scaled(*factor) })
            }
            Source::Model(model) => Ok(model.sample(self.cfg.seed, key)),
        }
    }

    fn collect(
        &mut self,
        name: &str,
        sample_index: u64,
        source: Source<'_>,
        kind: SpectrumKind,
    ) -> Result<Pooled> {
        let results: Vec<Result<EmpiricalSpectrum>> = (0..self.cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let key = (sample_index << 32) | r as u64;
                let m = self.draw(&source, key)?;
                let spec = match kind {
                    SpectrumKind::EigenvaluesComplex => eigenvalues(&m),
                    SpectrumKind::SingularValues => singular_values(&m),
                };
                log::info!("{name}: replicate {r} done");
                spec
            })
            .collect();
        let mut parts = Vec::new();
        let mut last_error = None;
        for (r, res) in results.into_iter().enumerate() {
            match res {
                Ok(spec) => parts.push((r, spec)),
                Err(e) if e.is_numeric() => {
                    log::warn!("{name}: replicate {r} degraded: {e}");
                    self.degraded.push(DegradedReplicate {
                        sample: name.to_string(),
                        replicate: r,
                        error: e.to_string(),
                    });
                    last_error = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        if parts.is_empty() {
            return Err(last_error.unwrap_or(Error::NoConvergence { residual: f64::NAN }));
        }
        let pooled = EmpiricalSpectrum::pool(parts.iter().map(|(_, s)| s.clone()))?;
        self.spectra.push(NamedSpectrum {
            name: name.to_string(),
            spectrum: pooled.clone(),
        });
        Ok(Pooled {
            name: name.to_string(),
            pooled,
            parts,
        })
    }

    fn record(&mut self, name: String, value: f64) {
        let tolerance = self.cfg.tolerance(&name);
        let pass = tolerance.is_none_or(|t| value <= t);
        self.statistics.push(Statistic {
            name,
            value,
            tolerance,
            pass,
        });
    }

    /// One-sample radial KS of a pooled sample and of each replicate.
    fn radial_against(&mut self, stat: String, sample: &Pooled, law: &LimitLaw) -> Result<()> {
        let cdf = |r: f64| law.radial_cdf(r);
        let value = try_ks_distance(&radial_cdf(&sample.pooled)?, cdf)?;
        self.record(stat.clone(), value);
        for (r, part) in &sample.parts {
            let v = try_ks_distance(&radial_cdf(part)?, cdf)?;
            self.per_replicate.push(ReplicateStatistic {
                sample: sample.name.clone(),
                replicate: *r,
                name: stat.clone(),
                value: v,
            });
        }
        Ok(())
    }

    fn radial_w1(&mut self, stat: &str, sample: &Pooled, law: &LimitLaw) -> Result<()> {
        let emp = radial_cdf(&sample.pooled)?;
        let w = wasserstein1(&emp, |r| law.radial_cdf(r).unwrap_or(f64::NAN), 0.0, W1_WINDOW);
        self.record(stat.to_string(), w);
        Ok(())
    }

    fn angular(&mut self, sample: &Pooled) -> Result<()> {
        let emp = angular_cdf(&sample.pooled)?;
        let value = crate::spectra::ks_distance(&emp, |t| ((t + PI) / (2.0 * PI)).clamp(0.0, 1.0));
        self.record("angular-ks".into(), value);
        Ok(())
    }

    fn two_sample(&mut self, stat: String, a: &Pooled, b: &Pooled) -> Result<()> {
        let value = two_sample_ks(&radial_cdf(&a.pooled)?, &radial_cdf(&b.pooled)?);
        self.record(stat, value);
        Ok(())
    }

    fn one_sample_steps<F: Fn(f64) -> Result<f64>>(
        &mut self,
        stat: &str,
        sample: &Pooled,
        view: fn(&EmpiricalSpectrum) -> Result<StepCdf>,
        cdf: F,
    ) -> Result<()> {
        let value = try_ks_distance(&view(&sample.pooled)?, &cdf)?;
        self.record(stat.to_string(), value);
        for (r, part) in &sample.parts {
            let v = try_ks_distance(&view(part)?, &cdf)?;
            self.per_replicate.push(ReplicateStatistic {
                sample: sample.name.clone(),
                replicate: *r,
                name: stat.to_string(),
                value: v,
            });
        }
        Ok(())
    }

    fn finish(self, started: Instant) -> ExperimentReport {
        let failures: Vec<String> = self
            .statistics
            .iter()
            .filter(|s| !s.pass)
            .map(|s| {
                format!(
                    "{} = {:.5} exceeds tolerance {}",
                    s.name,
                    s.value,
                    s.tolerance.unwrap_or(f64::NAN)
                )
            })
            .collect();
        ExperimentReport {
            config: self.cfg.clone(),
            pass: failures.is_empty(),
            statistics: self.statistics,
            per_replicate: self.per_replicate,
            degraded_replicates: self.degraded,
            failures,
            artifacts: Vec::new(),
            timings: Timings {
                wall_seconds: started.elapsed().as_secs_f64(),
            },
            spectra: self.spectra,
        }
    }
}

fn stable_limit(alpha: f64) -> Result<LimitLaw> {
    LimitLaw::stable(alpha)
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let mut run = Runner::new(cfg);
    let eig = SpectrumKind::EigenvaluesComplex;
    match &cfg.experiment {
        Experiment::LawCheck { word, dist } => {
            let law = stable_limit(stable_word_index(word)?)?;
            let s = run.collect("word", 0, Source::Word { word, dist: *dist, factor: 1.0 }, eig)?;
            run.radial_against("radial-ks".into(), &s, &law)?;
            run.angular(&s)?;
            run.radial_w1("radial-w1", &s, &law)?;
        }
        Experiment::Stability { l, m, dist } => {
            let alpha = 2.0 / (*l as f64 + 1.0);
            let law = stable_limit(alpha)?;
            let single = MatrixWord::product_with_inverses(*l);
            let sum = single.clone().with_summands(*m)?;
            let (_, normalizer) = oplus_stable(alpha, *m)?;
            let a = run.collect("single", 0, Source::Word { word: &single, dist: *dist, factor: 1.0 }, eig)?;
            let b = run.collect("sum", 1, Source::Word { word: &sum, dist: *dist, factor: normalizer }, eig)?;
            run.two_sample("two-sample-ks".into(), &a, &b)?;
            run.radial_against("one-sample-ks:single".into(), &a, &law)?;
            run.radial_against("one-sample-ks:sum".into(), &b, &law)?;
        }
        Experiment::PowerStability { powers, m, dist } => {
            let l: u32 = powers.iter().sum();
            let alpha = 2.0 / (l as f64 + 1.0);
            let law = stable_limit(alpha)?;
            let powered = MatrixWord::with_inverse_powers(powers)?;
            let distinct = MatrixWord::product_with_inverses(l);
            let a = run.collect("powered", 0, Source::Word { word: &powered, dist: *dist, factor: 1.0 }, eig)?;
            let b = run.collect("distinct", 1, Source::Word { word: &distinct, dist: *dist, factor: 1.0 }, eig)?;
            run.two_sample("two-sample-ks".into(), &a, &b)?;
            run.radial_against("one-sample-ks:powered".into(), &a, &law)?;
            run.radial_against("one-sample-ks:distinct".into(), &b, &law)?;
            if *m > 1 {
                let sum = powered.clone().with_summands(*m)?;
                let (_, normalizer) = oplus_stable(alpha, *m)?;
                let c = run.collect("sum", 2, Source::Word { word: &sum, dist: *dist, factor: normalizer }, eig)?;
                run.radial_against("one-sample-ks:sum".into(), &c, &law)?;
            }
        }
        Experiment::Universality { word, dists } => {
            let law = word.stable_index().map(stable_limit).transpose()?;
            let mut samples = Vec::new();
            for (k, d) in dists.iter().enumerate() {
                let s = run.collect(&d.to_string(), k as u64, Source::Word { word, dist: *d, factor: 1.0 }, eig)?;
                if let Some(law) = &law {
                    run.radial_against(format!("one-sample-ks:{d}"), &s, law)?;
                }
                samples.push((d, s));
            }
            for i in 0..samples.len() {
                for j in i + 1..samples.len() {
                    let name = format!("two-sample-ks:{}/{}", samples[i].0, samples[j].0);
                    run.two_sample(name, &samples[i].1, &samples[j].1)?;
                }
            }
        }
        Experiment::MatrixModel { alpha } => {
            let law = stable_limit(*alpha)?;
            let model = StableModel::new(*alpha, cfg.n)?;
            let s = run.collect("model", 0, Source::Model(&model), eig)?;
            run.radial_against("radial-ks".into(), &s, &law)?;
            run.angular(&s)?;
            run.radial_w1("radial-w1", &s, &law)?;
        }
        Experiment::SingularLaw { word, dist } => {
            let sv = SpectrumKind::SingularValues;
            let s = run.collect("word", 0, Source::Word { word, dist: *dist, factor: 1.0 }, sv)?;
            if is_single_factor(word) {
                run.one_sample_steps("mp-ks", &s, square, |x| Ok(mp_cdf(x)))?;
            } else {
                let table = DensityTable::new(StableLaw::symmetric(stable_word_index(word)?)?)?;
                run.one_sample_steps("symmetrized-ks", &s, symmetrize, |x| Ok(table.cdf(x)))?;
            }
        }
    }
    Ok(run.finish(started))
}

pub fn run_law_check(word: MatrixWord, n: usize, replicates: usize, seed: u64) -> Result<ExperimentReport> {
    let exp = Experiment::LawCheck { word, dist: default_dist() };
    run(&ExperimentConfig::new(exp, n, replicates, seed))
}

pub fn run_stability_check(l: u32, m: u32, n: usize, replicates: usize, seed: u64) -> Result<ExperimentReport> {
    let exp = Experiment::Stability { l, m, dist: default_dist() };
    run(&ExperimentConfig::new(exp, n, replicates, seed))
}

pub fn run_power_check(
    powers: Vec<u32>,
    m: u32,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let exp = Experiment::PowerStability { powers, m, dist: default_dist() };
    run(&ExperimentConfig::new(exp, n, replicates, seed))
}

pub fn run_universality_check(
    word: MatrixWord,
    dists: Vec<EntryDistribution>,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    run(&ExperimentConfig::new(Experiment::Universality { word, dists }, n, replicates, seed))
}

pub fn run_matrix_model_check(alpha: f64, n: usize, replicates: usize, seed: u64) -> Result<ExperimentReport> {
    run(&ExperimentConfig::new(Experiment::MatrixModel { alpha }, n, replicates, seed))
}

pub fn run_singular_law_check(word: MatrixWord, n: usize, replicates: usize, seed: u64) -> Result<ExperimentReport> {
    let exp = Experiment::SingularLaw { word, dist: default_dist() };
    run(&ExperimentConfig::new(exp, n, replicates, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law_check_json(extra: &str) -> String {
        format!(
            r#"{{"schema_version": 1, "seed": 5, "n": 32, "replicates": 2,
                "experiment": {{"kind": "law-check", "word": "X0 X1^-1"}}{extra}}}"#
        )
    }

    #[test]
    fn config_parses_and_validates() {
        let cfg = ExperimentConfig::from_json(&law_check_json("")).unwrap();
        assert_eq!(cfg.tolerance("radial-ks"), Some(0.06));
        let cfg = ExperimentConfig::from_json(&law_check_json(r#", "tolerances": {"radial-ks": 0.2}"#)).unwrap();
        assert_eq!(cfg.tolerance("radial-ks"), Some(0.2));
        assert!(ExperimentConfig::from_json(&law_check_json(r#", "tolerances": {"nope": 0.2}"#)).is_err());
        assert!(ExperimentConfig::from_json(&law_check_json(r#", "tolerances": {"radial-ks": -1}"#)).is_err());
        let no_seed = r#"{"schema_version": 1, "n": 32, "replicates": 2,
            "experiment": {"kind": "matrix-model", "alpha": 1.0}}"#;
        assert!(ExperimentConfig::from_json(no_seed).is_err());
        let small = law_check_json("").replace("\"n\": 32", "\"n\": 4");
        assert!(ExperimentConfig::from_json(&small).is_err());
        let typo = law_check_json(r#", "replicate": 3"#);
        assert!(ExperimentConfig::from_json(&typo).is_err());
    }

    #[test]
    fn universality_pair_names() {
        let cfg = ExperimentConfig::new(
            Experiment::Universality {
                word: MatrixWord::product_with_inverses(1),
                dists: vec![EntryDistribution::GaussianComplex, EntryDistribution::Rademacher],
            },
            16,
            1,
            1,
        );
        let names: Vec<_> = cfg.default_tolerances().into_keys().collect();
        assert_eq!(names, vec!["two-sample-ks:gaussian-complex/rademacher".to_string()]);
        let mut over = cfg.clone();
        over.tolerances.insert("two-sample-ks".into(), 0.5);
        over.validate().unwrap();
        assert_eq!(over.tolerance("two-sample-ks:gaussian-complex/rademacher"), Some(0.5));
    }

    #[test]
    fn single_distribution_universality_passes_trivially() {
        let report = run_universality_check(
            MatrixWord::product_with_inverses(1),
            vec![EntryDistribution::GaussianComplex],
            16,
            1,
            3,
        )
        .unwrap();
        assert!(report.statistics.iter().all(|s| !s.name.starts_with("two-sample")));
        assert!(report.pass);
    }

    #[test]
    fn small_runs_are_deterministic() {
        let a = run_stability_check(1, 2, 24, 3, 17).unwrap();
        let b = run_stability_check(1, 2, 24, 3, 17).unwrap();
        assert_eq!(a.body(), b.body());
        assert_eq!(a.per_replicate.len(), 6);
        let c = run_stability_check(1, 2, 24, 3, 18).unwrap();
        assert_ne!(a.body(), c.body());
    }

    #[test]
    fn pass_matches_tolerances() {
        let r = run_law_check(MatrixWord::product_with_inverses(0), 16, 1, 2).unwrap();
        for s in &r.statistics {
            if let Some(t) = s.tolerance {
                assert_eq!(s.pass, s.value <= t);
            }
        }
        assert_eq!(r.pass, r.failures.is_empty());
    }
}
