//! `freestable` command-line tool.
//!
//! Exit codes: 0 pass, 1 experiment failure, 2 configuration error,
//! 3 numerical failure.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freestable::ensembles::{sample_word, EntryDistribution, MatrixWord};
use freestable::experiments::{self, ExperimentConfig};
use freestable::limits::LimitLaw;
use freestable::spectra::{eigenvalues, singular_values, SpectrumMetadata};
use freestable::Error;

use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "freestable", version, about = "Limiting spectral laws of products of random matrices")]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate radial laws on a grid of radii.
    Densities(DensitiesArgs),
    /// Run an experiment described by a JSON config.
    Run(RunArgs),
    /// Sample one realization of a matrix word and write its spectra.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("laws").required(true).multiple(true))]
struct DensitiesArgs {
    /// Numbers of inverse factors, e.g. `0,1,2,3`.
    #[arg(long = "l", value_delimiter = ',', num_args = 1.., group = "laws")]
    inverses: Vec<u32>,
    /// Stability indices in (0, 2], e.g. `1,1.5`.
    #[arg(long, value_delimiter = ',', num_args = 1.., group = "laws")]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long, default_value_t = 3.0)]
    r_max: f64,
    #[arg(long, default_value_t = 301)]
    count: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Replaces the seed given in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override `NAME=VALUE`; repeatable.
    #[arg(long = "tolerance-override", value_name = "KEY=VAL")]
    tolerance_overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Word such as `X0 X1^-1`.
    #[arg(long)]
    word: MatrixWord,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "gaussian-complex")]
    dist: EntryDistribution,
    /// Regularization of inverse factors.
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// A failure with its exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| io_failure(path, e))
}

fn densities(args: &DensitiesArgs) -> Result<bool, Failure> {
    if !(args.r_min >= 0.0 && args.r_max > args.r_min && args.r_max.is_finite() && args.count >= 2) {
        return Err(Failure::Config(format!(
            "invalid grid: need 0 <= r_min < r_max and count >= 2, got [{}, {}] x {}",
            args.r_min, args.r_max, args.count
        )));
    }
    let mut laws = Vec::new();
    for &l in &args.inverses {
        let law = if l <= 3 {
            LimitLaw::closed_form(l)?
        } else {
            LimitLaw::stable(2.0 / (l as f64 + 1.0))?
        };
        laws.push((format!("density_l{l}.csv"), law));
    }
    for &alpha in &args.alpha {
        laws.push((format!("density_alpha{alpha}.csv"), LimitLaw::stable(alpha)?));
    }
    let step = (args.r_max - args.r_min) / (args.count - 1) as f64;
    let radii: Vec<f64> = (0..args.count).map(|k| args.r_min + step * k as f64).collect();
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new(&args.out, None);
    for (name, law) in laws {
        let path = args.out.join(&name);
        law.write_csv(&radii, &path)?;
        manifest.add(&path)?;
    }
    manifest.write()?;
    Ok(true)
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| io_failure(&args.config, e))?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    for spec in &args.tolerance_overrides {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("tolerance override {spec:?} is not KEY=VAL")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("tolerance override {spec:?} has a non-numeric value")))?;
        cfg.tolerances.insert(key.trim().to_string(), value);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<bool, Failure> {
    let cfg = load_config(args)?;
    let mut report = experiments::run(&cfg)?;
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new(&args.out, Some(cfg.seed));
    manifest.set_config(&args.config)?;
    for named in &report.spectra {
        let file = format!("spectrum_{}.csv", named.name);
        named.spectrum.write_csv(&args.out.join(&file))?;
        report.artifacts.push(file);
    }
    let summary = "summary.csv".to_string();
    experiments::write_summary_csv(std::slice::from_ref(&report), &args.out.join(&summary))?;
    report.artifacts.push(summary);
    let report_path = args.out.join("report.json");
    report.write_json(&report_path)?;
    for file in &report.artifacts {
        manifest.add(&args.out.join(file))?;
    }
    manifest.add(&report_path)?;
    manifest.write()?;
    for s in &report.statistics {
        match s.tolerance {
            Some(t) => println!("{:<5} {} = {:.5} (tolerance {t})", if s.pass { "pass" } else { "FAIL" }, s.name, s.value),
            None => println!("info  {} = {:.5}", s.name, s.value),
        }
    }
    if !report.degraded_replicates.is_empty() {
        println!("degraded replicates: {}", report.degraded_replicates.len());
    }
    for f in &report.failures {
        eprintln!("failure: {f}");
    }
    Ok(report.pass)
}

fn sample(args: &SampleArgs) -> Result<bool, Failure> {
    if args.n == 0 {
        return Err(Failure::Config("n must be at least 1".into()));
    }
    let m = sample_word(&args.word, args.n, args.dist, args.t, args.seed, 0)?;
    let eig = eigenvalues(&m)?;
    let sv = singular_values(&m)?;
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new(&args.out, Some(args.seed));
    let meta = SpectrumMetadata {
        word: args.word.to_string(),
        n: args.n,
        seed: args.seed,
        replicates: 1,
    };
    for (stem, spec) in [("eigenvalues", &eig), ("singular_values", &sv)] {
        let csv = args.out.join(format!("{stem}.csv"));
        let json = args.out.join(format!("{stem}.json"));
        spec.write_csv(&csv)?;
        spec.write_json(&json, &meta)?;
        manifest.add(&csv)?;
        manifest.add(&json)?;
    }
    manifest.write()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("configuration error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Densities(args) => densities(args),
        Command::Run(args) => run(args),
        Command::Sample(args) => sample(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.code())
        }
    }
}
