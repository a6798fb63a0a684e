//! Black-box prediction functions `f: Z -> Y`.
//!
//! Estimators only ever see a [`Predictor`]: an id plus the ability to map a
//! feature matrix to predictions. What sits behind it (a trained additive
//! model, the true regression function, externally supplied predictions) is
//! not visible to them.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::data::{FeatureMatrix, LabeledDataset, Table};
use crate::datagen::GenConfig;
use crate::error::{Error, Result};
use crate::smoother::{AdditiveConfig, AdditiveModel, fit_additive};

/// The capability estimators are allowed to use.
pub trait Predictor: Send + Sync {
    fn id(&self) -> &str;
    fn predict(&self, z: &FeatureMatrix) -> Result<Vec<f64>>;
}

type RowFn = dyn Fn(&[f64]) -> Option<f64> + Send + Sync;

#[derive(Clone)]
pub enum PredictorKind {
    TrainedAdditive(AdditiveModel),
    Oracle(GenConfig),
    /// User-supplied row function; `None` means the row is not covered.
    Custom { n_features: usize, f: Arc<RowFn> },
}

impl fmt::Debug for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictorKind::TrainedAdditive(_) => f.write_str("TrainedAdditive"),
            PredictorKind::Oracle(_) => f.write_str("Oracle"),
            PredictorKind::Custom { n_features, .. } => write!(f, "Custom({n_features})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PredictorModel {
    pub id: String,
    pub kind: PredictorKind,
}

impl PredictorModel {
    pub fn custom(
        id: impl Into<String>,
        n_features: usize,
        f: impl Fn(&[f64]) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            kind: PredictorKind::Custom {
                n_features,
                f: Arc::new(f),
            },
        }
    }

    /// A lookup table from feature rows to externally produced predictions.
    /// Rows are matched bit-for-bit; conflicting duplicates are rejected.
    pub fn tabulated(
        id: impl Into<String>,
        z: &FeatureMatrix,
        predictions: &[f64],
    ) -> Result<Self> {
        let mut table = PredictionTable::default();
        table.insert_all(z, predictions)?;
        Ok(table.into_predictor(id, z.cols()))
    }

    /// Predictions stored in `column` of the CSV at `path`, keyed by that
    /// file's `z1..zp` columns.
    pub fn from_csv_column(id: impl Into<String>, path: &Path, column: &str) -> Result<Self> {
        let table = Table::read(path)?;
        let z = table.features()?;
        let preds = table.column(column)?;
        Self::tabulated(id, &z, &preds).map_err(|e| Error::parse(path, e.to_string()))
    }
}

/// Accumulates `(row, prediction)` pairs for a tabulated predictor.
#[derive(Debug, Default, Clone)]
pub struct PredictionTable {
    map: HashMap<Vec<u64>, f64>,
}

impl PredictionTable {
    pub fn insert_all(&mut self, z: &FeatureMatrix, predictions: &[f64]) -> Result<()> {
        if predictions.len() != z.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictions for {} rows",
                predictions.len(),
                z.rows()
            )));
        }
        for (i, &p) in predictions.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite("predictions"));
            }
            let key = row_key(&z.row(i));
            if let Some(prev) = self.map.insert(key, p)
                && prev.to_bits() != p.to_bits()
            {
                return Err(Error::DegenerateInput(format!(
                    "row {i} repeats a feature vector with a different prediction"
                )));
            }
        }
        Ok(())
    }

    pub fn into_predictor(self, id: impl Into<String>, n_features: usize) -> PredictorModel {
        let map = self.map;
        PredictorModel::custom(id, n_features, move |row| map.get(&row_key(row)).copied())
    }
}

fn row_key(row: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 compare equal as features.
    row.iter().map(|v| (v + 0.0).to_bits()).collect()
}

impl Predictor for PredictorModel {
    fn id(&self) -> &str {
        &self.id
    }

    fn predict(&self, z: &FeatureMatrix) -> Result<Vec<f64>> {
        match &self.kind {
            PredictorKind::TrainedAdditive(m) => m.predict(z),
            PredictorKind::Oracle(cfg) => {
                if z.cols() != crate::datagen::N_FEATURES {
                    return Err(Error::DimensionMismatch(format!(
                        "oracle expects {} features, got {}",
                        crate::datagen::N_FEATURES,
                        z.cols()
                    )));
                }
                let cols: Vec<&[f64]> = (0..z.cols()).map(|j| z.col(j)).collect();
                Ok((0..z.rows())
                    .map(|i| cfg.true_regression(&[cols[0][i], cols[1][i], cols[2][i], cols[3][i]]))
                    .collect())
            }
            PredictorKind::Custom { n_features, f } => {
                if z.cols() != *n_features {
                    return Err(Error::DimensionMismatch(format!(
                        "predictor expects {n_features} features, got {}",
                        z.cols()
                    )));
                }
                (0..z.rows())
                    .map(|i| f(&z.row(i)).ok_or(Error::UnknownRow(i)))
                    .collect()
            }
        }
    }
}

/// Fit an additive model on all feature columns of `training`.
pub fn train_fhat(
    training: &LabeledDataset,
    id: impl Into<String>,
    config: &AdditiveConfig,
) -> Result<PredictorModel> {
    let model = fit_additive(&training.z, &training.y, config)?;
    Ok(PredictorModel {
        id: id.into(),
        kind: PredictorKind::TrainedAdditive(model),
    })
}

/// The true regression function `E[Y | Z = z]` of the generating model.
pub fn oracle_fhat(config: &GenConfig) -> PredictorModel {
    PredictorModel {
        id: "oracle".into(),
        kind: PredictorKind::Oracle(config.clone()),
    }
}

pub fn predict(model: &dyn Predictor, z: &FeatureMatrix) -> Result<Vec<f64>> {
    model.predict(z)
}
