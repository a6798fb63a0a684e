use rayon::prelude::*;

use crate::datagen::{GenConfig, generate};
use crate::error::{Error, Result};
use crate::inference::{
    self, AnalyticVariant, BootstrapDraws, BootstrapSe, EstimateReport, Method, PredictedSample,
};
use crate::predictor::{PredictorModel, oracle_fhat, train_fhat};
use crate::rng::{self, purpose};
use crate::smoother::AdditiveConfig;

use super::config::{Design, ExperimentConfig, FhatId, TRAINING_SEEDS};
use super::record::ReplicateRecord;

pub const THREADS_ENV: &str = "PREDINFER_THREADS";

/// Where a replicate gets its predictors from.
#[derive(Debug, Clone)]
pub enum FhatSource {
    /// Trained once, shared by every replicate.
    Fixed(Vec<PredictorModel>),
    /// Trained afresh from a replicate-specific training set.
    Retrain,
}

pub fn generating_config(config: &ExperimentConfig, n: usize, seed: u64) -> GenConfig {
    GenConfig::new(n, config.beta1_star, seed)
}

/// The fixed predictors `f1..f3` (trained on the shipped training seeds) and
/// the oracle, as selected by `config.fhat_ids`.
pub fn fixed_predictor(config: &ExperimentConfig, id: FhatId) -> Result<PredictorModel> {
    match id {
        FhatId::Trained(k) => {
            let training = generate(&generating_config(config, config.n_train, TRAINING_SEEDS[k - 1]))?;
            train_fhat(&training, id.label(), &AdditiveConfig::default())
        }
        FhatId::Oracle => Ok(oracle_fhat(&generating_config(config, 1, 0))),
    }
}

pub fn prepare_fhats(config: &ExperimentConfig) -> Result<FhatSource> {
    match config.design {
        Design::FixedFhat => config
            .fhat_ids
            .iter()
            .map(|&id| fixed_predictor(config, id))
            .collect::<Result<Vec<_>>>()
            .map(FhatSource::Fixed),
        Design::RetrainPerReplicate => Ok(FhatSource::Retrain),
    }
}

fn cell_path(kind: u64, (n_lab, n_unlab): (usize, usize), replicate: usize) -> [u64; 4] {
    [kind, n_lab as u64, n_unlab as u64, replicate as u64]
}

/// One Monte Carlo replicate for one `(n_lab, n_unlab)` cell: fresh labeled
/// and unlabeled samples (and, when retraining, a fresh predictor), then every
/// selected method for every predictor. Failures become records with a
/// non-`ok` status.
pub fn run_replicate(
    config: &ExperimentConfig,
    source: &FhatSource,
    cell: (usize, usize),
    replicate: usize,
) -> Vec<ReplicateRecord> {
    let seed = |kind| rng::derive_seed(config.master_seed, &cell_path(kind, cell, replicate));
    let (n_lab, n_unlab) = cell;

    let retrained;
    let fhats: Vec<&PredictorModel> = match source {
        FhatSource::Fixed(list) => list.iter().collect(),
        FhatSource::Retrain => {
            let trained = generate(&generating_config(config, config.n_train, seed(purpose::TRAINING)))
                .and_then(|t| train_fhat(&t, "retrained", &AdditiveConfig::default()));
            match trained {
                Ok(f) => {
                    retrained = f;
                    vec![&retrained]
                }
                Err(e) => return failures(config, replicate, "retrained", cell, e.tag()),
            }
        }
    };

    let data = generate(&generating_config(config, n_lab, seed(purpose::LABELED))).and_then(|lab| {
        let unlab = generate(&generating_config(config, n_unlab, seed(purpose::UNLABELED)))?;
        Ok((lab, unlab.strip_labels()))
    });
    let (lab, unlab) = match data {
        Ok(d) => d,
        Err(e) => {
            return fhats
                .iter()
                .flat_map(|f| failures(config, replicate, &f.id, cell, e.tag()))
                .collect();
        }
    };

    let mut out = Vec::with_capacity(fhats.len() * config.methods.len());
    for (k, fhat) in fhats.iter().enumerate() {
        let sample = match PredictedSample::new(&lab, &unlab, *fhat) {
            Ok(s) => s,
            Err(e) => {
                out.extend(failures(config, replicate, &fhat.id, cell, e.tag()));
                continue;
            }
        };
        let mut draws: Option<std::result::Result<BootstrapDraws, &'static str>> = None;
        for &method in &config.methods {
            let est = if method.is_bootstrap() {
                let draws = draws.get_or_insert_with(|| {
                    let mut r = rng::stream(rng::derive_seed(
                        config.master_seed,
                        &[purpose::BOOTSTRAP, n_lab as u64, n_unlab as u64, replicate as u64, k as u64],
                    ));
                    inference::wang_bootstrap(&sample, config.bootstrap_b, config.noise_mode, &mut r)
                        .map_err(|e| e.tag())
                });
                match draws {
                    Ok(d) => d.report(bootstrap_mode(method)).map_err(|e| e.tag()),
                    Err(tag) => Err(*tag),
                }
            } else {
                estimate_closed_form(method, &sample).map_err(|e| e.tag())
            };
            out.push(match est {
                Ok(r) => ReplicateRecord::from_report(
                    replicate,
                    &r,
                    config.beta1_star,
                    config.ci_level,
                    &fhat.id,
                ),
                Err(tag) => ReplicateRecord::failure(replicate, method, &fhat.id, n_lab, n_unlab, tag),
            });
        }
    }
    out
}

fn bootstrap_mode(method: Method) -> BootstrapSe {
    match method {
        Method::WangBootstrapNonparametric => BootstrapSe::Nonparametric,
        _ => BootstrapSe::Parametric,
    }
}

fn estimate_closed_form(method: Method, s: &PredictedSample) -> Result<EstimateReport> {
    match method {
        Method::Naive => inference::naive(s),
        Method::Classical => inference::classical(s),
        Method::WangAnalytic => inference::wang_analytic(s, AnalyticVariant::Code),
        Method::WangAnalyticPublication => inference::wang_analytic(s, AnalyticVariant::Publication),
        Method::Ppi => inference::ppi(s),
        Method::WangBootstrapParametric | Method::WangBootstrapNonparametric => {
            unreachable!("bootstrap methods are handled by the runner")
        }
    }
}

fn failures(
    config: &ExperimentConfig,
    replicate: usize,
    fhat_id: &str,
    (n_lab, n_unlab): (usize, usize),
    tag: &str,
) -> Vec<ReplicateRecord> {
    config
        .methods
        .iter()
        .map(|&m| ReplicateRecord::failure(replicate, m, fhat_id, n_lab, n_unlab, tag))
        .collect()
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV}={v:?} is not a count")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker threads: {e}")))
}

/// Run every cell of the grid. Records come back ordered by cell, then
/// replicate index, then predictor, then method, independent of scheduling.
pub fn run_records(config: &ExperimentConfig) -> Result<Vec<ReplicateRecord>> {
    config.validate()?;
    let source = prepare_fhats(config)?;
    let pool = thread_pool()?;
    let mut records = Vec::new();
    for &cell in &config.n_grid {
        let per_rep: Vec<Vec<ReplicateRecord>> = pool.install(|| {
            (0..config.replicates)
                .into_par_iter()
                .map(|r| run_replicate(config, &source, cell, r))
                .collect()
        });
        records.extend(per_rep.into_iter().flatten());
    }
    Ok(records)
}
