//! Scaling, custom transforms and feature selection.

use std::collections::HashMap;
use std::sync::Arc;

use radiowb_analytics::expr::{parse, CustomTransform};
use radiowb_analytics::pipeline::FittedStep;
use radiowb_analytics::scale::{fit_scaler, ScalerKind};
use radiowb_analytics::select::{Selection, SelectorSpec};
use serde::Deserialize;
use serde_json::Value;

use super::{err, Simple, MODEL, TABLE};
use crate::payload::{Payload, PayloadKind, TablePayload};
use crate::registry::{params, Inputs, NodeKind, PortSpec, RunContext};

const TABLE_IN: &[PortSpec] = &[PortSpec::one("table", TABLE)];
const MODELS_IN: &[PortSpec] = &[PortSpec::many("models", MODEL), PortSpec::optional("table", TABLE)];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Scaler {
    kind: ScalerKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Custom {
    expression: String,
    /// Every column when empty.
    #[serde(default)]
    columns: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manual {
    columns: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightPick {
    k: usize,
}

fn extend(
    t: &TablePayload,
    table: radiowb_analytics::FeatureTable,
    step: FittedStep,
    sel: Option<Selection>,
) -> Payload {
    let mut chain = t.chain.clone();
    chain.push(step);
    Payload::Table(TablePayload { table, chain, selection: sel })
}

fn select(t: &TablePayload, sel: Selection) -> Result<Payload, String> {
    let table = sel.apply(&t.table).map_err(err)?;
    Ok(extend(t, table, sel.step(), Some(sel)))
}

/// A selector node; its parameters are the selector document minus the
/// `method` tag, which the node type supplies.
struct Selector {
    name: &'static str,
    method: &'static str,
}

impl Selector {
    fn spec(&self, v: &Value) -> Result<SelectorSpec, String> {
        let mut v = v.clone();
        match v.as_object_mut() {
            Some(map) => {
                map.insert("method".into(), Value::String(self.method.into()));
            }
            None => return Err("parameters must be an object".into()),
        }
        params(&v)
    }
}

impl NodeKind for Selector {
    fn name(&self) -> &'static str {
        self.name
    }

    fn category(&self) -> &'static str {
        "selection"
    }

    fn inputs(&self) -> &'static [PortSpec] {
        TABLE_IN
    }

    fn output(&self) -> PayloadKind {
        PayloadKind::Table
    }

    fn check_params(&self, v: &Value) -> Vec<String> {
        self.spec(v).err().into_iter().collect()
    }

    fn run(&self, v: &Value, inputs: &Inputs, _: &RunContext) -> Result<Payload, String> {
        let t = inputs.table("table")?;
        let sel = self.spec(v)?.run(&t.table).map_err(err)?;
        select(t, sel)
    }
}

pub(super) fn kinds() -> Vec<Arc<dyn NodeKind>> {
    let mut v: Vec<Arc<dyn NodeKind>> = vec![
        Arc::new(Simple::new("scaler", "preprocessing", TABLE_IN, PayloadKind::Table, |p: Scaler, i, _| {
            let t = i.table("table")?;
            let s = fit_scaler(&t.table, p.kind).map_err(err)?;
            let table = s.apply(&t.table).map_err(err)?;
            Ok(extend(t, table, FittedStep::Scale(s), None))
        })),
        Arc::new(
            Simple::new("custom-transform", "preprocessing", TABLE_IN, PayloadKind::Table, |p: Custom, i, _| {
                let t = i.table("table")?;
                let columns = if p.columns.is_empty() { t.table.columns.clone() } else { p.columns };
                let c = CustomTransform { expression: p.expression, columns };
                let table = c.apply(&t.table).map_err(err)?;
                Ok(extend(t, table, FittedStep::Custom(c), None))
            })
            .check(|p| parse(&p.expression).err().map(err).into_iter().collect()),
        ),
        Arc::new(
            Simple::new("manual-select", "selection", TABLE_IN, PayloadKind::Table, |p: Manual, i, _| {
                let t = i.table("table")?;
                let table = t.table.select_named(&p.columns).map_err(err)?;
                Ok(extend(t, table, FittedStep::Select { columns: p.columns }, None))
            })
            .check(|p| {
                if p.columns.is_empty() {
                    vec!["columns must not be empty".into()]
                } else {
                    Vec::new()
                }
            }),
        ),
        Arc::new(Simple::new("weight-pick", "selection", MODELS_IN, PayloadKind::Table, weight_pick).check(|p| {
            if p.k == 0 {
                vec!["k must be at least 1".into()]
            } else {
                Vec::new()
            }
        })),
    ];
    for (name, method) in [
        ("variance-threshold", "variance-threshold"),
        ("select-k-best", "k-best"),
        ("select-from-model", "from-model"),
        ("rfe", "rfe"),
        ("select-stable", "stable"),
    ] {
        v.push(Arc::new(Selector { name, method }));
    }
    v
}

/// Keeps the `k` columns with the largest mean of per-model weights, each
/// model's weights scaled so its largest is 1.
fn weight_pick(p: WeightPick, inputs: &Inputs, _: &RunContext) -> Result<Payload, String> {
    let models = inputs.models("models")?;
    let base = match inputs.get("table") {
        Some(_) => inputs.table("table")?,
        None => &models[0].data,
    };
    let cols = &base.table.columns;
    if p.k > cols.len() {
        return Err(format!("k = {} exceeds the {} available columns", p.k, cols.len()));
    }
    let mut total: HashMap<&str, f64> = HashMap::new();
    for m in &models {
        let w = m
            .model
            .feature_weights()
            .ok_or_else(|| format!("{} model exposes no feature weights", m.model.spec.kind()))?;
        let max = w.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            for (name, v) in m.model.feature_names.iter().zip(&w) {
                *total.entry(name.as_str()).or_default() += v / max;
            }
        }
    }
    let n = models.len() as f64;
    let scores: Vec<f64> = cols.iter().map(|c| total.get(c.as_str()).copied().unwrap_or(0.0) / n).collect();
    let mut order: Vec<usize> = (0..cols.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut keep = order[..p.k].to_vec();
    keep.sort_unstable();
    let sel = Selection {
        kept: keep.iter().map(|&j| cols[j].clone()).collect(),
        scores: cols.iter().cloned().zip(scores).collect(),
        ranking: order.iter().map(|&j| cols[j].clone()).collect(),
        elimination_order: Vec::new(),
        path: Vec::new(),
    };
    select(base, sel)
}
