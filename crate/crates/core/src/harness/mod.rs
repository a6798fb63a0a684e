//! Monte Carlo experiments: configuration, replicate runner, summaries and
//! CSV output.

mod config;
mod output;
mod presets;
mod record;
mod runner;
mod summary;

pub use config::{Design, ExperimentConfig, FhatId, MIN_N_LAB, TRAINING_SEEDS, default_grid, parse_methods};
pub(crate) use config::parse_list;
pub use output::{
    ExperimentOutput, QUANTILES_FILE, RECORDS_FILE, RECORDS_HEADER, SUMMARY_FILE, SUMMARY_HEADER,
    run_experiment, write_records, write_summary, write_t_quantiles,
};
pub use presets::{PRESET_NAMES, preset};
pub use record::{ReplicateRecord, STATUS_OK};
pub use runner::{FhatSource, THREADS_ENV, fixed_predictor, prepare_fhats, run_records, run_replicate};
pub use summary::{CellSummary, ExperimentSummary, N_QUANTILES, quantile_probs, summarize};
