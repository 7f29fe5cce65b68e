#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use radiowb_analytics::FeatureTable;
use radiowb_graph::{Inputs, NodeKind, Payload, PayloadKind, PortSpec, Registry, RunContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

/// Two-class table: the first `informative` columns shift with the label,
/// the rest are pure noise. Labels alternate so classes are balanced.
pub fn synthetic(n: usize, d: usize, informative: usize, shift: f64, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<Option<u8>> = (0..n).map(|i| Some((i % 2) as u8)).collect();
    let values = labels
        .iter()
        .map(|y| {
            (0..d)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    let mean = if j < informative { shift * y.unwrap() as f64 } else { 0.0 };
                    10.0 + 3.0 * (mean + z)
                })
                .collect()
        })
        .collect();
    let row_ids = (0..n).map(|i| format!("roi{i:03}")).collect();
    let columns = (0..d).map(|j| format!("f{j:03}")).collect();
    FeatureTable::new(row_ids, columns, values).unwrap().with_labels(labels).unwrap()
}

pub fn write_table(dir: &Path, name: &str, table: &FeatureTable) {
    std::fs::write(dir.join(name), table.to_csv()).unwrap();
}

const TABLE: &[PayloadKind] = &[PayloadKind::Table];
const MIX_IN: &[PortSpec] = &[PortSpec::many("in", TABLE)];

fn scalar(v: f64) -> Payload {
    Payload::table(FeatureTable::new(vec!["r".into()], vec!["v".into()], vec![vec![v]]).unwrap())
}

fn fail_requested(params: &Value) -> bool {
    params.get("fail").and_then(Value::as_bool).unwrap_or(false)
}

/// Source node emitting `value`, or failing when `fail` is set.
pub struct Const;

impl NodeKind for Const {
    fn name(&self) -> &'static str {
        "test-const"
    }
    fn category(&self) -> &'static str {
        "test"
    }
    fn inputs(&self) -> &'static [PortSpec] {
        &[]
    }
    fn output(&self) -> PayloadKind {
        PayloadKind::Table
    }
    fn check_params(&self, _: &Value) -> Vec<String> {
        Vec::new()
    }
    fn run(&self, params: &Value, _: &Inputs, _: &RunContext) -> Result<Payload, String> {
        if fail_requested(params) {
            return Err("injected fault".into());
        }
        Ok(scalar(params["value"].as_f64().unwrap_or(0.0)))
    }
}

/// Sums its inputs plus `salt`, or fails when `fail` is set.
pub struct Mix;

impl NodeKind for Mix {
    fn name(&self) -> &'static str {
        "test-mix"
    }
    fn category(&self) -> &'static str {
        "test"
    }
    fn inputs(&self) -> &'static [PortSpec] {
        MIX_IN
    }
    fn output(&self) -> PayloadKind {
        PayloadKind::Table
    }
    fn check_params(&self, _: &Value) -> Vec<String> {
        Vec::new()
    }
    fn run(&self, params: &Value, inputs: &Inputs, _: &RunContext) -> Result<Payload, String> {
        if fail_requested(params) {
            return Err("injected fault".into());
        }
        let mut total = params["salt"].as_f64().unwrap_or(0.0);
        for p in inputs.all("in") {
            total += p.as_table().unwrap().table.values[0][0];
        }
        Ok(scalar(total))
    }
}

pub fn test_registry() -> Registry {
    Registry::builtin().with(Arc::new(Const)).with(Arc::new(Mix))
}
