//! Classifier training, grid search and hyperparameter search.

use std::collections::BTreeMap;
use std::sync::Arc;

use radiowb_analytics::cv::{grid_search_cv, stratified_folds};
use radiowb_analytics::metrics::auc;
use radiowb_analytics::models::{train_classifier, train_on_rows};
use radiowb_analytics::search::{hyperparameter_search, Config, SearchBudget, SearchSpace};
use radiowb_analytics::{Error as AnalyticsError, FeatureTable, ModelSpec};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::{err, Simple, TABLE};
use crate::payload::{ModelPayload, Payload, PayloadKind, TablePayload};
use crate::registry::{Inputs, NodeKind, PortSpec, RunContext};

const TABLE_IN: &[PortSpec] = &[PortSpec::one("table", TABLE)];
const INNER_FOLDS: usize = 5;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSearch {
    #[serde(default)]
    kind: Option<String>,
    /// Explicit cells; the kind's default grid when absent.
    #[serde(default)]
    grid: Option<Vec<ModelSpec>>,
    #[serde(default = "five")]
    folds: usize,
    #[serde(default)]
    seed: Option<u64>,
}

fn five() -> usize {
    5
}

impl GridSearch {
    fn cells(&self) -> Result<Vec<ModelSpec>, String> {
        match (&self.grid, &self.kind) {
            (Some(g), _) => Ok(g.clone()),
            (None, Some(k)) => ModelSpec::default_grid(k).map_err(err),
            (None, None) => Err("set `kind` or `grid`".into()),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Search {
    kind: String,
    /// Fixed fields merged under every sampled configuration.
    #[serde(default)]
    base: Map<String, Value>,
    space: SearchSpace,
    budget: SearchBudget,
}

fn fields(kind: &str) -> &'static [&'static str] {
    match kind {
        "logistic-regression" => &["c"],
        "svm" => &["kernel", "c", "gamma"],
        "decision-tree" => &["max_depth", "min_samples_leaf"],
        "random-forest" => &["n_trees", "max_depth", "min_samples_leaf", "seed"],
        "ada-boost" => &["n_rounds"],
        _ => &[],
    }
}

const INTEGER_FIELDS: &[&str] = &["max_depth", "min_samples_leaf", "n_trees", "n_rounds", "seed"];
const KERNELS: &[&str] = &["linear", "rbf"];

/// Builds a model spec from a numeric search configuration. `kernel` is an
/// index into `[linear, rbf]`; count-like fields are rounded.
pub fn spec_from_config(kind: &str, base: &Map<String, Value>, config: &Config) -> Result<ModelSpec, String> {
    let mut obj = base.clone();
    obj.insert("kind".into(), json!(kind));
    for (k, &v) in config {
        let val = if k == "kernel" {
            json!(KERNELS.get(v as usize).ok_or_else(|| format!("kernel index {v} out of range"))?)
        } else if INTEGER_FIELDS.contains(&k.as_str()) {
            json!(v.round().max(0.0) as u64)
        } else {
            json!(v)
        };
        obj.insert(k.clone(), val);
    }
    let spec: ModelSpec = serde_json::from_value(Value::Object(obj)).map_err(err)?;
    spec.validate().map_err(err)?;
    Ok(spec)
}

fn wrap(t: &TablePayload, model: radiowb_analytics::TrainedModel) -> ModelPayload {
    ModelPayload { model: model.with_preprocessing(t.chain.clone()), data: t.clone(), cv: None, search: None }
}

pub(super) fn kinds() -> Vec<Arc<dyn NodeKind>> {
    vec![
        Arc::new(
            Simple::new("train-model", "model", TABLE_IN, PayloadKind::Model, |p: ModelSpec, i, _| {
                let t = i.table("table")?;
                let m = train_classifier(&t.table, &p).map_err(err)?;
                Ok(Payload::Model(Box::new(wrap(t, m))))
            })
            .check(|p| p.validate().err().map(err).into_iter().collect()),
        ),
        Arc::new(
            Simple::new("grid-search", "model", TABLE_IN, PayloadKind::Model, |p: GridSearch, i, ctx| {
                let t = i.table("table")?;
                let g = grid_search_cv(&t.table, &p.cells()?, p.folds, p.seed.unwrap_or(ctx.seed)).map_err(err)?;
                let mut out = wrap(t, g.model.clone());
                out.cv = Some(g.into());
                Ok(Payload::Model(Box::new(out)))
            })
            .check(|p| {
                let mut v = Vec::new();
                match p.cells() {
                    Ok(cells) if cells.is_empty() => v.push("grid is empty".into()),
                    Ok(_) => {}
                    Err(e) => v.push(e),
                }
                if p.folds < 2 {
                    v.push("folds must be at least 2".into());
                }
                v
            }),
        ),
        Arc::new(Simple::new("hyperparameter-search", "model", TABLE_IN, PayloadKind::Model, search).check(|p| {
            let known = fields(&p.kind);
            if known.is_empty() {
                return vec![format!("unknown model kind `{}`", p.kind)];
            }
            let names = p.space.domains.keys().chain(p.space.queue.iter().flat_map(|c| c.keys()));
            names
                .filter(|n| !known.contains(&n.as_str()))
                .map(|n| format!("`{n}` is not a {} parameter", p.kind))
                .collect()
        })),
    ]
}

/// Train rows interleaved by class so every prefix stays close to the
/// class balance of the whole set.
fn balanced_order(table: &FeatureTable, rows: &[usize]) -> Vec<usize> {
    let mut by_class: BTreeMap<Option<u8>, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        by_class.entry(table.labels[r]).or_default().push(r);
    }
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for members in by_class.values() {
        let n = members.len() as f64;
        keyed.extend(members.iter().enumerate().map(|(k, &r)| ((k as f64 + 0.5) / n, r)));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, r)| r).collect()
}

/// Resource `r` of `R` trains on the first `⌈r/R⌉` share of an inner train
/// set and scores AUC on a fixed inner hold-out fold.
fn search(p: Search, inputs: &Inputs, _: &RunContext) -> Result<Payload, String> {
    let t = inputs.table("table")?;
    let table = &t.table;
    let fit = table.fit_rows();
    let fold = stratified_folds(table, &fit, INNER_FOLDS, p.budget.seed);
    let (mut inner, mut hold) = (Vec::new(), Vec::new());
    for (k, &r) in fit.iter().enumerate() {
        if fold[k] == 0 {
            hold.push(r);
        } else {
            inner.push(r);
        }
    }
    let inner = balanced_order(table, &inner);
    let hold_table = table.subset_rows(&hold);
    let (_, hold_y) = hold_table.xy(&(0..hold.len()).collect::<Vec<_>>()).map_err(err)?;
    let max = p.budget.max_resource as f64;
    let objective = |config: &Config, resource: u64| -> radiowb_analytics::Result<f64> {
        let spec = spec_from_config(&p.kind, &p.base, config).map_err(AnalyticsError::InvalidParameter)?;
        let n = ((resource as f64 / max) * inner.len() as f64).ceil() as usize;
        let model = train_on_rows(table, &inner[..n.clamp(2, inner.len())], &spec)?;
        auc(&model.score(&hold_table)?, &hold_y)
    };
    let outcome = hyperparameter_search(objective, &p.space, &p.budget).map_err(err)?;
    let spec = spec_from_config(&p.kind, &p.base, &outcome.best_config)?;
    let m = train_classifier(table, &spec).map_err(err)?;
    let mut out = wrap(t, m);
    out.search = Some(outcome);
    Ok(Payload::Model(Box::new(out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_maps_to_spec() {
        let cfg: Config = [("kernel".to_string(), 1.0), ("c".to_string(), 2.5)].into_iter().collect();
        let spec = spec_from_config("svm", &Map::new(), &cfg).unwrap();
        assert_eq!(spec, serde_json::from_value(json!({"kind": "svm", "kernel": "rbf", "c": 2.5})).unwrap());
        let cfg: Config = [("n_rounds".to_string(), 9.6)].into_iter().collect();
        assert_eq!(spec_from_config("ada-boost", &Map::new(), &cfg).unwrap(), ModelSpec::AdaBoost { n_rounds: 10 });
        let bad: Config = [("c".to_string(), -1.0)].into_iter().collect();
        assert!(spec_from_config("logistic-regression", &Map::new(), &bad).is_err());
    }
}
