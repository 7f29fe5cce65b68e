//! Fitted preprocessing steps that travel with a table and its model.

use serde::{Deserialize, Serialize};

use crate::expr::CustomTransform;
use crate::scale::FittedScaler;
use crate::{FeatureTable, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum FittedStep {
    Scale(FittedScaler),
    Select { columns: Vec<String> },
    Custom(CustomTransform),
}

impl FittedStep {
    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable> {
        match self {
            FittedStep::Scale(s) => s.apply(table),
            FittedStep::Select { columns } => table.select_named(columns),
            FittedStep::Custom(c) => c.apply(table),
        }
    }
}

/// Replays `chain` in order on a fresh table.
pub fn apply_chain(table: &FeatureTable, chain: &[FittedStep]) -> Result<FeatureTable> {
    let mut t = table.clone();
    for step in chain {
        t = step.apply(&t)?;
    }
    Ok(t)
}
