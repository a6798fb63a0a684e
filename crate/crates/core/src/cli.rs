//! Command-line front end: `simulate`, `preset` and `estimate`.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors, 1 for
//! failures while running.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::harness::{self, ExperimentConfig};
use crate::inference::{
    self, AnalyticVariant, BootstrapSe, EstimateReport, Method, NoiseMode, PredictedSample,
};
use crate::rng;

#[derive(Debug, Parser)]
#[command(name = "predinfer", version, about = "Prediction-based inference estimators and simulation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation grid from a config file and/or flags.
    Simulate {
        /// `key = value` file; flags given on the command line override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a named preset, optionally overriding its settings.
    Preset {
        /// One of paper-s3-null, paper-s3-alt, paper-s4-null, paper-s4-alt, oracle-extreme.
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run estimators on user CSV files and print a CSV report to stdout.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
struct Overrides {
    /// fixed_fhat or retrain_per_replicate.
    #[arg(long)]
    design: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<String>,
    /// Comma-separated labeled sample sizes.
    #[arg(long)]
    n_lab: Option<String>,
    /// Comma-separated unlabeled sample sizes.
    #[arg(long)]
    n_unlab: Option<String>,
    #[arg(long)]
    n_train: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    /// Comma-separated method tags.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    bootstrap_b: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated predictors: f1, f2, f3, oracle.
    #[arg(long)]
    fhat: Option<String>,
    #[arg(long)]
    ci_level: Option<String>,
    /// gaussian or resample.
    #[arg(long)]
    noise_mode: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// CSV with a `y` column and an `x` (or `z1`) column.
    #[arg(long)]
    labeled: PathBuf,
    /// CSV with an `x` (or `z1`) column.
    #[arg(long)]
    unlabeled: PathBuf,
    /// Column of the labeled file, or a one-column CSV, holding predictions.
    #[arg(long)]
    predictions_labeled: String,
    /// Column of the unlabeled file, or a one-column CSV, holding predictions.
    #[arg(long)]
    predictions_unlabeled: String,
    #[arg(long, default_value = "classical,naive,wang_analytic,wang_boot_param,wang_boot_nonparam,ppi")]
    methods: String,
    #[arg(long, default_value_t = 100)]
    bootstrap_b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_null: f64,
    #[arg(long, default_value_t = inference::DEFAULT_CI_LEVEL)]
    ci_level: f64,
    /// gaussian or resample.
    #[arg(long, default_value = "gaussian")]
    noise_mode: String,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        let scalar = [
            ("design", &self.design),
            ("beta1", &self.beta1),
            ("n-train", &self.n_train),
            ("replicates", &self.replicates),
            ("methods", &self.methods),
            ("bootstrap-b", &self.bootstrap_b),
            ("seed", &self.seed),
            ("fhat", &self.fhat),
            ("ci-level", &self.ci_level),
            ("noise-mode", &self.noise_mode),
        ];
        for (key, value) in scalar {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.n_lab.is_some() || self.n_unlab.is_some() {
            let list = |k, v: &Option<String>| v.as_deref().map(|v| harness::parse_list(k, v)).transpose();
            cfg.set_grid(list("n-lab", &self.n_lab)?, list("n-unlab", &self.n_unlab)?)?;
        }
        Ok(())
    }
}

/// Parse `argv` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate { config, overrides } => {
            let mut cfg = ExperimentConfig::default();
            if let Some(path) = config {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                cfg.apply_kv_text(&text)?;
            }
            simulate(cfg, &overrides)
        }
        Command::Preset { name, overrides } => simulate(harness::preset(&name)?, &overrides),
        Command::Estimate(args) => estimate(&args),
    }
}

fn simulate(mut cfg: ExperimentConfig, overrides: &Overrides) -> Result<()> {
    overrides.apply(&mut cfg)?;
    cfg.validate()?;
    let out = harness::run_experiment(&cfg, &overrides.out_dir)?;
    println!("{}", out.records.display());
    println!("{}", out.summary.display());
    println!("{}", out.t_quantiles.display());
    Ok(())
}

fn covariate(table: &Table) -> Result<Vec<f64>> {
    table.column(if table.has_column("x") { "x" } else { "z1" })
}

/// A column of `table`, or else the single (or `prediction`) column of the
/// CSV file named by `spec`.
fn predictions(table: &Table, spec: &str) -> Result<Vec<f64>> {
    if table.has_column(spec) {
        return table.column(spec);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(Error::InvalidConfig(format!(
            "{spec:?} is neither a column of the data file nor a readable file"
        )));
    }
    let t = Table::read(path)?;
    match t.header.as_slice() {
        [only] => t.column(only),
        _ if t.has_column("prediction") => t.column("prediction"),
        _ => Err(Error::parse(path, "expected one column or a `prediction` column")),
    }
}

fn parse_noise(s: &str) -> Result<NoiseMode> {
    match s {
        "gaussian" => Ok(NoiseMode::Gaussian),
        "resample" => Ok(NoiseMode::Resample),
        other => Err(Error::InvalidConfig(format!(
            "unknown noise mode {other:?} (expected gaussian or resample)"
        ))),
    }
}

const ESTIMATE_HEADER: [&str; 11] = [
    "method", "fhat_id", "n_lab", "n_unlab", "beta_hat", "se", "t_stat", "p_value", "ci_lo", "ci_hi",
    "status",
];

fn estimate(args: &EstimateArgs) -> Result<()> {
    let methods = harness::parse_methods(&args.methods)?;
    let noise = parse_noise(&args.noise_mode)?;
    if !(args.ci_level > 0.0 && args.ci_level < 1.0) {
        return Err(Error::InvalidConfig(format!("ci-level {} not in (0, 1)", args.ci_level)));
    }
    let lab = Table::read(&args.labeled)?;
    let unlab = Table::read(&args.unlabeled)?;
    let sample = PredictedSample::from_parts(
        lab.column("y")?,
        covariate(&lab)?,
        predictions(&lab, &args.predictions_labeled)?,
        covariate(&unlab)?,
        predictions(&unlab, &args.predictions_unlabeled)?,
        "user",
    )?;

    let mut draws = None;
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    let io = |e: csv::Error| Error::InvalidConfig(format!("cannot write to stdout: {e}"));
    w.write_record(ESTIMATE_HEADER).map_err(io)?;
    for method in methods {
        let est: std::result::Result<EstimateReport, &'static str> = match method {
            Method::WangBootstrapParametric | Method::WangBootstrapNonparametric => {
                let d = draws.get_or_insert_with(|| {
                    let mut r = rng::stream(rng::derive_seed(args.seed, &[rng::purpose::BOOTSTRAP]));
                    inference::wang_bootstrap(&sample, args.bootstrap_b, noise, &mut r).map_err(|e| e.tag())
                });
                let mode = if method == Method::WangBootstrapNonparametric {
                    BootstrapSe::Nonparametric
                } else {
                    BootstrapSe::Parametric
                };
                match d {
                    Ok(d) => d.report(mode).map_err(|e| e.tag()),
                    Err(tag) => Err(*tag),
                }
            }
            _ => closed_form(method, &sample).map_err(|e| e.tag()),
        };
        w.write_record(estimate_row(method, &sample, est, args)).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidConfig(format!("cannot write to stdout: {e}")))?;
    std::io::stdout().flush().ok();
    Ok(())
}

fn closed_form(method: Method, s: &PredictedSample) -> Result<EstimateReport> {
    match method {
        Method::Naive => inference::naive(s),
        Method::Classical => inference::classical(s),
        Method::WangAnalytic => inference::wang_analytic(s, AnalyticVariant::Code),
        Method::WangAnalyticPublication => inference::wang_analytic(s, AnalyticVariant::Publication),
        _ => inference::ppi(s),
    }
}

fn estimate_row(
    method: Method,
    s: &PredictedSample,
    est: std::result::Result<EstimateReport, &'static str>,
    args: &EstimateArgs,
) -> Vec<String> {
    let num = |v: f64| format!("{v:?}");
    let mut row = vec![
        method.tag().to_string(),
        s.fhat_id.clone(),
        s.n_lab().to_string(),
        s.n_unlab().to_string(),
    ];
    let nan = f64::NAN;
    let (vals, status) = match est {
        Err(tag) => ([nan; 6], tag.to_string()),
        Ok(r) => match inference::report(&r, args.beta_null, args.ci_level) {
            Ok(inf) => ([r.estimate(), r.se, inf.t, inf.p, inf.ci.0, inf.ci.1], "ok".to_string()),
            Err(e) => ([r.estimate(), r.se, nan, nan, nan, nan], e.tag().to_string()),
        },
    };
    row.extend(vals.iter().map(|&v| num(v)));
    row.push(status);
    row
}
