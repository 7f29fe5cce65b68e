//! Column scalers fitted on train rows and row normalization.

use serde::{Deserialize, Serialize};

use crate::{FeatureTable, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalerKind {
    MaxAbs,
    MinMax,
    Standard,
    Normalizer,
}

/// Per-column affine map `x ↦ (x − shift) / scale`. A `scale` of zero
/// marks a degenerate column that maps to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedScaler {
    pub kind: ScalerKind,
    pub columns: Vec<String>,
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

pub fn fit_scaler(table: &FeatureTable, kind: ScalerKind) -> Result<FittedScaler> {
    table.check_finite()?;
    let rows = table.fit_rows();
    let d = table.n_cols();
    let (mut shift, mut scale) = (vec![0.0; d], vec![1.0; d]);
    if kind != ScalerKind::Normalizer && !rows.is_empty() {
        for j in 0..d {
            let col: Vec<f64> = rows.iter().map(|&r| table.values[r][j]).collect();
            match kind {
                ScalerKind::MaxAbs => {
                    let m = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    scale[j] = if m > 0.0 { m } else { 1.0 };
                }
                ScalerKind::MinMax => {
                    let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    shift[j] = lo;
                    scale[j] = hi - lo;
                }
                ScalerKind::Standard => {
                    let n = col.len() as f64;
                    let mu = col.iter().sum::<f64>() / n;
                    let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
                    shift[j] = mu;
                    scale[j] = var.sqrt();
                }
                ScalerKind::Normalizer => unreachable!(),
            }
        }
    }
    Ok(FittedScaler { kind, columns: table.columns.clone(), shift, scale })
}

impl FittedScaler {
    /// Applies to every row; column set and row ids are unchanged.
    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable> {
        let idx = self.columns.iter().map(|c| table.column_index(c)).collect::<Result<Vec<_>>>()?;
        let mut out = table.clone();
        for row in &mut out.values {
            if self.kind == ScalerKind::Normalizer {
                let norm = idx.iter().map(|&j| row[j] * row[j]).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for &j in &idx {
                        row[j] /= norm;
                    }
                }
                continue;
            }
            for (k, &j) in idx.iter().enumerate() {
                row[j] = if self.scale[k] == 0.0 { 0.0 } else { (row[j] - self.shift[k]) / self.scale[k] };
            }
        }
        Ok(out)
    }
}
