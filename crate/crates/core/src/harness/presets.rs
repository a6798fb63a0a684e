use crate::error::{Error, Result};

use super::config::{Design, ExperimentConfig, FhatId};

pub const PRESET_NAMES: [&str; 5] = [
    "paper-s3-null",
    "paper-s3-alt",
    "paper-s4-null",
    "paper-s4-alt",
    "oracle-extreme",
];

/// Named experiment configurations.
///
/// `paper-s3-*` reuse three trained predictors plus the oracle across
/// replicates; `paper-s4-*` retrain the predictor in every replicate;
/// `oracle-extreme` uses only the true regression function.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::default();
    let cfg = match name {
        "paper-s3-null" => base,
        "paper-s3-alt" => ExperimentConfig {
            beta1_star: 1.0,
            ..base
        },
        "paper-s4-null" => ExperimentConfig {
            design: Design::RetrainPerReplicate,
            ..base
        },
        "paper-s4-alt" => ExperimentConfig {
            design: Design::RetrainPerReplicate,
            beta1_star: 1.0,
            ..base
        },
        "oracle-extreme" => ExperimentConfig {
            fhat_ids: vec![FhatId::Oracle],
            ..base
        },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset {other:?} (expected one of {})",
                PRESET_NAMES.join(", ")
            )));
        }
    };
    Ok(cfg)
}
