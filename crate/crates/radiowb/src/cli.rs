//! Headless execution of a graph file against a data directory.

use std::collections::BTreeMap;
use std::path::Path;

use radiowb_graph::{Engine, GraphSpec, Registry, RunContext, RunRecord, Status};
use serde::{Deserialize, Serialize};

use crate::store::valid_id;

/// Per-node line of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node_type: String,
    pub status: Status,
    /// Payload file under the output directory, for nodes that produced one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_key: Option<String>,
    pub elapsed_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub engine_version: String,
    pub seed: u64,
    pub parallelism: usize,
    pub elapsed_ms: f64,
    pub nodes: BTreeMap<String, NodeSummary>,
}

impl RunSummary {
    pub fn failed(&self) -> Vec<&str> {
        self.nodes.iter().filter(|(_, n)| n.status != Status::Ok).map(|(id, _)| id.as_str()).collect()
    }
}

/// File name for a node's payload; ids that are not file-safe are hashed.
pub fn output_file(node_id: &str) -> String {
    if valid_id(node_id) {
        format!("{node_id}.json")
    } else {
        format!("node-{}.json", &crate::store::sha256_hex(node_id.as_bytes())[..16])
    }
}

/// Runs `spec` on `data` and writes one payload file per successful node
/// plus `run.json` into `out`.
pub fn run_to_dir(
    spec: &GraphSpec,
    data: &Path,
    out: &Path,
    parallelism: usize,
    seed: u64,
) -> radiowb_graph::Result<(RunRecord, RunSummary)> {
    let record = Engine::new(Registry::builtin()).execute(spec, &RunContext::new(data, seed), parallelism.max(1))?;
    std::fs::create_dir_all(out)?;
    let mut nodes = BTreeMap::new();
    for n in &spec.nodes {
        let r = &record.nodes[&n.id];
        let output = match &r.payload {
            Some(p) => {
                let file = output_file(&n.id);
                std::fs::write(out.join(&file), serde_json::to_vec(p.as_ref())?)?;
                Some(file)
            }
            None => None,
        };
        nodes.insert(
            n.id.clone(),
            NodeSummary {
                node_type: n.node_type.clone(),
                status: r.status,
                output,
                digest: r.digest.clone(),
                cache_key: r.cache_key.clone(),
                elapsed_ms: r.elapsed_ms,
                error: r.error.clone(),
            },
        );
    }
    let summary = RunSummary {
        engine_version: record.engine_version.clone(),
        seed,
        parallelism: record.parallelism,
        elapsed_ms: record.elapsed_ms,
        nodes,
    };
    std::fs::write(out.join("run.json"), serde_json::to_vec_pretty(&summary)?)?;
    Ok((record, summary))
}
