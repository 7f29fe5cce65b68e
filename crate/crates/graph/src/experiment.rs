//! Saved runs and re-testing their models on new tables.
//!
//! A store directory holds `experiments/<id>.json` and a content-addressed
//! `models/<sha256>.json`. Model payloads live only in the model store;
//! records reference them by digest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use radiowb_analytics::pipeline::{apply_chain, FittedStep};
use radiowb_analytics::{FeatureTable, TrainedModel};
use serde::{Deserialize, Serialize};

use crate::engine::{NodeResult, RunRecord, Status};
use crate::nodes::evaluate::{score_and_measure, Evaluate};
use crate::payload::{MetricsPayload, ModelPayload, Payload};
use crate::registry::params;
use crate::spec::GraphSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub record_id: String,
    /// Microseconds since the Unix epoch.
    pub created_at: u64,
    pub engine_version: String,
    pub spec: GraphSpec,
    pub seed: u64,
    /// Loader node id to the digest of the data it read.
    pub dataset: BTreeMap<String, String>,
    /// Node results; model payloads are stripped and kept in `models`.
    pub nodes: BTreeMap<String, NodeResult>,
    /// Model node id to model-store digest.
    pub models: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafMetrics {
    pub auc: f64,
    pub ap: f64,
    pub accuracy: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub record_id: String,
    pub created_at: u64,
    pub nodes: usize,
    pub failed: Vec<String>,
    pub metrics: BTreeMap<String, LeafMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retest {
    pub record_id: String,
    pub node: String,
    pub result: MetricsPayload,
}

#[derive(Debug, Clone)]
pub struct ExperimentStore {
    root: PathBuf,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", uuid::Uuid::new_v4().simple()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl ExperimentStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("experiments"))?;
        fs::create_dir_all(root.join("models"))?;
        Ok(Self { root })
    }

    fn record_path(&self, id: &str) -> Result<PathBuf> {
        if !valid_id(id) {
            return Err(Error::RecordNotFound(id.to_string()));
        }
        Ok(self.root.join("experiments").join(format!("{id}.json")))
    }

    fn model_path(&self, digest: &str) -> Result<PathBuf> {
        if !valid_id(digest) {
            return Err(Error::ModelNotFound(digest.to_string()));
        }
        Ok(self.root.join("models").join(format!("{digest}.json")))
    }

    pub fn save(&self, run: &RunRecord) -> Result<String> {
        let record_id = uuid::Uuid::new_v4().simple().to_string();
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_micros() as u64);
        let mut nodes = BTreeMap::new();
        let mut models = BTreeMap::new();
        let mut dataset = BTreeMap::new();
        for (id, r) in &run.nodes {
            let mut r = r.clone();
            if let Some(src) = &r.source {
                dataset.insert(id.clone(), src.clone());
            }
            if let Some(Payload::Model(m)) = r.payload.as_deref() {
                let digest = r.digest.clone().expect("ok payloads carry digests");
                let path = self.model_path(&digest)?;
                if !path.exists() {
                    write_atomic(&path, &serde_json::to_vec(m.as_ref())?)?;
                }
                models.insert(id.clone(), digest);
                r.payload = None;
            }
            nodes.insert(id.clone(), r);
        }
        let record = ExperimentRecord {
            record_id: record_id.clone(),
            created_at,
            engine_version: run.engine_version.clone(),
            spec: run.spec.clone(),
            seed: run.seed,
            dataset,
            nodes,
            models,
        };
        write_atomic(&self.record_path(&record_id)?, &serde_json::to_vec(&record)?)?;
        Ok(record_id)
    }

    pub fn load(&self, id: &str) -> Result<ExperimentRecord> {
        let path = self.record_path(id)?;
        let bytes = fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::RecordNotFound(id.to_string()),
            _ => Error::Io(e),
        })?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn model(&self, digest: &str) -> Result<ModelPayload> {
        let bytes = fs::read(self.model_path(digest)?).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::ModelNotFound(digest.to_string()),
            _ => Error::Io(e),
        })?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    /// A node's payload with model payloads restored from the model store.
    pub fn node_output(&self, record: &ExperimentRecord, node: &str) -> Result<Option<Arc<Payload>>> {
        if let Some(digest) = record.models.get(node) {
            return Ok(Some(Arc::new(Payload::Model(Box::new(self.model(digest)?)))));
        }
        Ok(record.nodes.get(node).and_then(|r| r.payload.clone()))
    }

    /// Records oldest first.
    pub fn list(&self) -> Result<Vec<ExperimentRecord>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("experiments"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                out.push(serde_json::from_slice::<ExperimentRecord>(&fs::read(&path)?)?);
            }
        }
        out.sort_by(|a, b| (a.created_at, &a.record_id).cmp(&(b.created_at, &b.record_id)));
        Ok(out)
    }

    pub fn history(&self) -> Result<Vec<ExperimentSummary>> {
        Ok(self.list()?.iter().map(summarize).collect())
    }

    /// Removes a record and every model no other record references.
    /// Returns the freed model digests.
    pub fn delete(&self, id: &str) -> Result<Vec<String>> {
        let record = self.load(id)?;
        fs::remove_file(self.record_path(id)?)?;
        let still_used: BTreeSet<String> = self.list()?.into_iter().flat_map(|r| r.models.into_values()).collect();
        let mut freed = Vec::new();
        for digest in record.models.into_values().collect::<BTreeSet<_>>() {
            if !still_used.contains(&digest) {
                let path = self.model_path(&digest)?;
                if path.exists() {
                    fs::remove_file(path)?;
                }
                freed.push(digest);
            }
        }
        Ok(freed)
    }

    pub fn model_digests(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("models"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    out.push(stem.to_string());
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Scores every row of `table` with the model feeding an evaluation node
    /// of the record, replaying the model's frozen preprocessing. The node
    /// defaults to the first successful `evaluate` node in document order.
    pub fn retest(&self, record_id: &str, table: &FeatureTable, node: Option<&str>) -> Result<Retest> {
        let record = self.load(record_id)?;
        let is_eval = |id: &str| record.spec.node(id).is_some_and(|n| n.node_type == "evaluate");
        let node = match node {
            Some(id) if is_eval(id) => id.to_string(),
            Some(id) => return Err(Error::NoEvaluation(format!("`{id}` is not an evaluate node"))),
            None => record
                .spec
                .nodes
                .iter()
                .find(|n| n.node_type == "evaluate" && record.nodes.get(&n.id).is_some_and(|r| r.status == Status::Ok))
                .map(|n| n.id.clone())
                .ok_or_else(|| Error::NoEvaluation("record has no successful evaluate node".into()))?,
        };
        let spec = record.spec.node(&node).expect("checked above");
        let source = record
            .spec
            .incoming(&node)
            .find(|e| e.port == "model")
            .map(|e| e.source.clone())
            .ok_or_else(|| Error::NoEvaluation(format!("`{node}` has no model input")))?;
        let digest = record
            .models
            .get(&source)
            .ok_or_else(|| Error::NoEvaluation(format!("model node `{source}` did not complete")))?;
        let model = self.model(digest)?.model;
        let p: Evaluate = params(&spec.params).map_err(|e| Error::NoEvaluation(e))?;

        let missing = missing_columns(&model, table);
        if !missing.is_empty() {
            return Err(Error::MissingColumns(missing));
        }
        let input = apply_chain(table, &model.preprocessing)?;
        let scores = model.score(&input)?;
        let seed = p.seed.unwrap_or(record.seed);
        let result = match score_and_measure(scores, &input, &p, seed).map_err(Error::NoEvaluation)? {
            Payload::Metrics(m) => m,
            _ => unreachable!("score_and_measure returns metrics"),
        };
        Ok(Retest { record_id: record_id.to_string(), node, result })
    }
}

/// Raw columns the model's preprocessing and design need but `table` lacks,
/// in first-use order.
pub fn missing_columns(model: &TrainedModel, table: &FeatureTable) -> Vec<String> {
    let have: BTreeSet<&str> = table.columns.iter().map(String::as_str).collect();
    let mut missing: Vec<String> = Vec::new();
    let mut need = |cols: &[String]| {
        for c in cols {
            if !have.contains(c.as_str()) && !missing.contains(c) {
                missing.push(c.clone());
            }
        }
    };
    for step in &model.preprocessing {
        match step {
            FittedStep::Scale(s) => need(&s.columns),
            FittedStep::Select { columns } => need(columns),
            FittedStep::Custom(c) => need(&c.columns),
        }
    }
    need(&model.feature_names);
    missing
}

fn summarize(r: &ExperimentRecord) -> ExperimentSummary {
    let metrics = r
        .nodes
        .iter()
        .filter_map(|(id, n)| match n.payload.as_deref() {
            Some(Payload::Metrics(m)) => Some((
                id.clone(),
                LeafMetrics { auc: m.metrics.auc, ap: m.metrics.ap, accuracy: m.metrics.accuracy, n: m.metrics.n },
            )),
            _ => None,
        })
        .collect();
    ExperimentSummary {
        record_id: r.record_id.clone(),
        created_at: r.created_at,
        nodes: r.nodes.len(),
        failed: r.nodes.iter().filter(|(_, n)| n.status == Status::Error).map(|(id, _)| id.clone()).collect(),
        metrics,
    }
}
