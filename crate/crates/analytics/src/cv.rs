//! Stratified k-fold grid search on AUC.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::auc;
use crate::models::{train_on_rows, ModelSpec, TrainedModel};
use crate::{Error, FeatureTable, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub cell: usize,
    pub fold: usize,
    /// `None` when the cell was skipped or the fold could not be scored.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub model: TrainedModel,
    pub grid: Vec<ModelSpec>,
    pub cv: Vec<CvRow>,
    pub mean_auc: Vec<Option<f64>>,
    pub best_cell: usize,
    pub warnings: Vec<String>,
}

/// Fold index per row of `rows`: each class is shuffled, then dealt round
/// robin so every fold gets its share of both classes.
pub fn stratified_folds(table: &FeatureTable, rows: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<Option<u8>, Vec<usize>> = BTreeMap::new();
    for (k, &r) in rows.iter().enumerate() {
        by_class.entry(table.labels[r]).or_default().push(k);
    }
    let mut out = vec![0; rows.len()];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &k in members.iter() {
            out[k] = next % folds;
            next += 1;
        }
    }
    out
}

pub fn grid_search_cv(table: &FeatureTable, grid: &[ModelSpec], folds: usize, seed: u64) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidParameter("need at least 2 folds".into()));
    }
    let rows = table.fit_rows();
    let (_, y) = table.xy(&rows)?;
    let assignment = stratified_folds(table, &rows, folds, seed);
    let mut warnings = Vec::new();
    let valid: Vec<bool> = grid
        .iter()
        .enumerate()
        .map(|(i, spec)| match spec.validate() {
            Ok(()) => true,
            Err(e) => {
                warnings.push(format!("grid cell {i} skipped: {e}"));
                false
            }
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|c| (0..folds).map(move |f| (c, f))).collect();
    let cv: Vec<CvRow> = jobs
        .par_iter()
        .map(|&(cell, fold)| {
            if !valid[cell] {
                return CvRow { cell, fold, auc: None };
            }
            let train: Vec<usize> = (0..rows.len()).filter(|&k| assignment[k] != fold).map(|k| rows[k]).collect();
            let held: Vec<usize> = (0..rows.len()).filter(|&k| assignment[k] == fold).collect();
            let score = train_on_rows(table, &train, &grid[cell]).ok().and_then(|m| {
                let sub = table.subset_rows(&held.iter().map(|&k| rows[k]).collect::<Vec<_>>());
                let s = m.score(&sub).ok()?;
                let labels: Vec<u8> = held.iter().map(|&k| y[k]).collect();
                auc(&s, &labels).ok()
            });
            CvRow { cell, fold, auc: score }
        })
        .collect();
    let mean_auc: Vec<Option<f64>> = (0..grid.len())
        .map(|c| {
            let v: Vec<f64> = cv.iter().filter(|r| r.cell == c).filter_map(|r| r.auc).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    let mut best: Option<usize> = None;
    for (c, m) in mean_auc.iter().enumerate() {
        if let Some(m) = m {
            if best.map_or(true, |b| *m > mean_auc[b].unwrap()) {
                best = Some(c);
            }
        }
    }
    let best_cell = best.ok_or_else(|| Error::InvalidParameter("no grid cell could be evaluated".into()))?;
    let model = train_on_rows(table, &rows, &grid[best_cell])?;
    Ok(GridSearchResult { model, grid: grid.to_vec(), cv, mean_auc, best_cell, warnings })
}
