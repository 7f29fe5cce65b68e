//! Combining calibrated scores from several models.

use serde::{Deserialize, Serialize};

use crate::models::TrainedModel;
use crate::{Error, FeatureTable, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    Averaging,
    Voting,
}

/// Averaging takes the mean score; voting takes the fraction of models
/// scoring at least 0.5.
pub fn combine(per_model: &[Vec<f64>], mode: EnsembleMode) -> Result<Vec<f64>> {
    let Some(first) = per_model.first() else {
        return Err(Error::InvalidParameter("ensemble needs at least one model".into()));
    };
    if per_model.iter().any(|s| s.len() != first.len()) {
        return Err(Error::InvalidParameter("models scored different row counts".into()));
    }
    let m = per_model.len() as f64;
    Ok((0..first.len())
        .map(|i| match mode {
            EnsembleMode::Averaging => per_model.iter().map(|s| s[i]).sum::<f64>() / m,
            EnsembleMode::Voting => per_model.iter().filter(|s| s[i] >= 0.5).count() as f64 / m,
        })
        .collect())
}

pub fn ensemble_predict(models: &[TrainedModel], table: &FeatureTable, mode: EnsembleMode) -> Result<Vec<f64>> {
    let scores = models.iter().map(|m| m.score(table)).collect::<Result<Vec<_>>>()?;
    combine(&scores, mode)
}
