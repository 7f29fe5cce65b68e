//! Metrics, ensembles and visualization data.

use std::sync::Arc;

use radiowb_analytics::cluster::kmeans;
use radiowb_analytics::ensemble::{combine, EnsembleMode};
use radiowb_analytics::heatmap::heatmap_order;
use radiowb_analytics::metrics::{compute_metrics, DEFAULT_PERMUTATIONS};
use radiowb_analytics::pipeline::apply_chain;
use radiowb_analytics::tsne::tsne;
use radiowb_analytics::{FeatureTable, Split};
use serde::Deserialize;

use super::{err, Simple, MODEL, TABLE};
use crate::payload::{MetricsPayload, ModelPayload, Payload, PayloadKind, PlotPayload};
use crate::registry::{Inputs, NodeKind, PortSpec};

const TABLE_IN: &[PortSpec] = &[PortSpec::one("table", TABLE)];
const MODEL_IN: &[PortSpec] = &[PortSpec::one("model", MODEL), PortSpec::optional("table", TABLE)];
const MODELS_IN: &[PortSpec] = &[PortSpec::many("models", MODEL), PortSpec::optional("table", TABLE)];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Evaluate {
    #[serde(default = "validation")]
    pub split: Split,
    #[serde(default = "permutations")]
    pub permutations: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn validation() -> Split {
    Split::Validation
}
fn permutations() -> usize {
    DEFAULT_PERMUTATIONS
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Ensemble {
    #[serde(default = "averaging")]
    mode: EnsembleMode,
    #[serde(default = "validation")]
    split: Split,
    #[serde(default = "permutations")]
    permutations: usize,
    #[serde(default)]
    seed: Option<u64>,
}

fn averaging() -> EnsembleMode {
    EnsembleMode::Averaging
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Heatmap {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Tsne {
    #[serde(default = "thirty")]
    perplexity: f64,
    #[serde(default = "thousand")]
    iterations: usize,
    #[serde(default)]
    seed: Option<u64>,
}

fn thirty() -> f64 {
    30.0
}
fn thousand() -> usize {
    1000
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Kmeans {
    k: usize,
    #[serde(default)]
    seed: Option<u64>,
}

/// The rows of `split` in the model's input space. A supplied table must
/// have gone through a prefix of the model's preprocessing; the rest of the
/// chain is replayed on it.
fn model_space(
    m: &ModelPayload,
    table: Option<&crate::payload::TablePayload>,
    split: Split,
) -> Result<FeatureTable, String> {
    let t = table.unwrap_or(&m.data);
    let chain = &m.model.preprocessing;
    if t.chain.len() > chain.len() || chain[..t.chain.len()] != t.chain[..] {
        return Err("table preprocessing is not a prefix of the model's preprocessing".into());
    }
    let rows = t.table.rows_in(split);
    if rows.is_empty() {
        return Err(format!("no rows in split `{}`", split.as_str()));
    }
    apply_chain(&t.table.subset_rows(&rows), &chain[t.chain.len()..]).map_err(err)
}

fn labels(t: &FeatureTable) -> Result<Vec<u8>, String> {
    t.labels.iter().zip(&t.row_ids).map(|(l, id)| l.ok_or_else(|| format!("row `{id}` has no label"))).collect()
}

fn optional_table(inputs: &Inputs) -> Result<Option<&crate::payload::TablePayload>, String> {
    inputs.get("table").map(|_| inputs.table("table")).transpose()
}

/// Scores `table` with the model and computes the evaluation metrics.
pub(crate) fn score_and_measure(
    scores: Vec<f64>,
    sub: &FeatureTable,
    p: &Evaluate,
    seed: u64,
) -> Result<Payload, String> {
    let y = labels(sub)?;
    let metrics = compute_metrics(&scores, &y, p.permutations, seed).map_err(err)?;
    Ok(Payload::Metrics(MetricsPayload { metrics, split: p.split, row_ids: sub.row_ids.clone(), labels: y, scores }))
}

pub(super) fn kinds() -> Vec<Arc<dyn NodeKind>> {
    vec![
        Arc::new(Simple::new("evaluate", "evaluation", MODEL_IN, PayloadKind::Metrics, |p: Evaluate, i, ctx| {
            let m = i.model("model")?;
            let sub = model_space(m, optional_table(i)?, p.split)?;
            let scores = m.model.score(&sub).map_err(err)?;
            score_and_measure(scores, &sub, &p, p.seed.unwrap_or(ctx.seed))
        })),
        Arc::new(Simple::new("ensemble", "evaluation", MODELS_IN, PayloadKind::Metrics, |p: Ensemble, i, ctx| {
            let eval = Evaluate { split: p.split, permutations: p.permutations, seed: p.seed };
            let table = optional_table(i)?;
            let mut per_model = Vec::new();
            let mut first: Option<FeatureTable> = None;
            for m in i.models("models")? {
                let sub = model_space(m, table, eval.split)?;
                per_model.push(m.model.score(&sub).map_err(err)?);
                match &first {
                    Some(f) if f.row_ids != sub.row_ids => return Err("models were evaluated on different rows".into()),
                    Some(_) => {}
                    None => first = Some(sub),
                }
            }
            let scores = combine(&per_model, p.mode).map_err(err)?;
            let sub = first.ok_or("ensemble needs at least one model")?;
            score_and_measure(scores, &sub, &eval, eval.seed.unwrap_or(ctx.seed))
        })),
        Arc::new(Simple::new("heatmap", "visualization", TABLE_IN, PayloadKind::Plot, |_: Heatmap, i, _| {
            let t = &i.table("table")?.table;
            t.check_finite().map_err(err)?;
            Ok(Payload::Plot(PlotPayload::Heatmap {
                row_ids: t.row_ids.clone(),
                columns: t.columns.clone(),
                order: heatmap_order(t),
            }))
        })),
        Arc::new(
            Simple::new("tsne", "visualization", TABLE_IN, PayloadKind::Plot, |p: Tsne, i, ctx| {
                let t = &i.table("table")?.table;
                let embedding = tsne(&t.values, p.perplexity, p.iterations, p.seed.unwrap_or(ctx.seed)).map_err(err)?;
                Ok(Payload::Plot(PlotPayload::Tsne { row_ids: t.row_ids.clone(), labels: t.labels.clone(), embedding }))
            })
            .check(|p| {
                if p.perplexity > 0.0 {
                    Vec::new()
                } else {
                    vec!["perplexity must be positive".into()]
                }
            }),
        ),
        Arc::new(
            Simple::new("kmeans", "visualization", TABLE_IN, PayloadKind::Plot, |p: Kmeans, i, ctx| {
                let t = &i.table("table")?.table;
                let clusters = kmeans(&t.values, p.k, p.seed.unwrap_or(ctx.seed)).map_err(err)?;
                Ok(Payload::Plot(PlotPayload::Kmeans {
                    row_ids: t.row_ids.clone(),
                    labels: t.labels.clone(),
                    clusters,
                }))
            })
            .check(|p| if p.k == 0 { vec!["k must be at least 1".into()] } else { Vec::new() }),
        ),
    ]
}
