//! Live state of graph runs started through the service.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use radiowb_graph::{GraphSpec, NodeResult, Status};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunPhase {
    Running,
    Finished,
    Failed,
}

/// Per-node status without the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeView {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    pub elapsed_ms: f64,
    pub from_cache: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<&NodeResult> for NodeView {
    fn from(r: &NodeResult) -> Self {
        Self {
            status: r.status,
            digest: r.digest.clone(),
            elapsed_ms: r.elapsed_ms,
            from_cache: r.from_cache,
            error: r.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunView {
    pub run_id: String,
    pub phase: RunPhase,
    pub seed: u64,
    pub parallelism: usize,
    pub started_at: u64,
    pub nodes: BTreeMap<String, NodeView>,
    /// Experiment record written when the run finished.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct RunEntry {
    pub spec: GraphSpec,
    pub view: RunView,
    pub results: BTreeMap<String, NodeResult>,
}

impl RunEntry {
    pub fn new(run_id: String, spec: GraphSpec, seed: u64, parallelism: usize, started_at: u64) -> Self {
        let pending =
            NodeView { status: Status::Pending, digest: None, elapsed_ms: 0.0, from_cache: false, error: None };
        let nodes = spec.nodes.iter().map(|n| (n.id.clone(), pending.clone())).collect();
        Self {
            spec,
            view: RunView {
                run_id,
                phase: RunPhase::Running,
                seed,
                parallelism,
                started_at,
                nodes,
                record_id: None,
                error: None,
            },
            results: BTreeMap::new(),
        }
    }

    pub fn observe(&mut self, id: &str, r: &NodeResult) {
        self.view.nodes.insert(id.to_string(), r.into());
        self.results.insert(id.to_string(), r.clone());
    }
}

#[derive(Default)]
pub struct Runs {
    runs: Mutex<HashMap<String, Arc<Mutex<RunEntry>>>>,
}

impl Runs {
    pub fn insert(&self, entry: RunEntry) -> Arc<Mutex<RunEntry>> {
        let id = entry.view.run_id.clone();
        let entry = Arc::new(Mutex::new(entry));
        self.runs.lock().unwrap().insert(id, entry.clone());
        entry
    }

    pub fn get(&self, id: &str) -> Option<Arc<Mutex<RunEntry>>> {
        self.runs.lock().unwrap().get(id).cloned()
    }
}
