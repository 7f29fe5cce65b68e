//! Cached, parallel execution with per-branch error isolation.
//!
//! Nodes run in waves: every pending node whose inputs are all ready runs
//! concurrently on a pool of the requested size, then the run record is
//! updated by the calling thread alone. A failed node marks its whole
//! descendant closure `skipped-upstream`; independent branches carry on.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::payload::Payload;
use crate::registry::{Inputs, NodeKind, Registry, RunContext};
use crate::spec::{canonical_json, GraphSpec};
use crate::validate::validate;
use crate::{Error, Result};

pub const ENGINE_VERSION: &str = concat!("radiowb-graph/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pending,
    Running,
    Ok,
    Error,
    SkippedUpstream,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Arc<Payload>>,
    /// SHA-256 of the serialized payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_key: Option<String>,
    /// Digest of the external data a loader read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub elapsed_ms: f64,
    #[serde(default)]
    pub from_cache: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl NodeResult {
    fn with_status(status: Status) -> Self {
        Self {
            status,
            payload: None,
            digest: None,
            cache_key: None,
            source: None,
            elapsed_ms: 0.0,
            from_cache: false,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub engine_version: String,
    pub spec: GraphSpec,
    pub seed: u64,
    pub parallelism: usize,
    pub nodes: BTreeMap<String, NodeResult>,
    pub elapsed_ms: f64,
}

impl RunRecord {
    pub fn status(&self, id: &str) -> Option<Status> {
        self.nodes.get(id).map(|n| n.status)
    }

    pub fn payload(&self, id: &str) -> Option<&Payload> {
        self.nodes.get(id)?.payload.as_deref()
    }

    /// Node ids with status `s`, sorted.
    pub fn with_status(&self, s: Status) -> Vec<String> {
        self.nodes.iter().filter(|(_, r)| r.status == s).map(|(id, _)| id.clone()).collect()
    }
}

/// Cache key of one node: digest over the engine version, node type,
/// canonical parameters, the run seed, the external-data digest and the
/// keys of its inputs in port order.
pub fn cache_key(
    node_type: &str,
    params: &Value,
    upstream: &[(String, String)],
    source: Option<&str>,
    seed: u64,
) -> String {
    let doc = json!({
        "engine": ENGINE_VERSION,
        "type": node_type,
        "params": params,
        "seed": seed,
        "source": source,
        "upstream": upstream,
    });
    hex::encode(Sha256::digest(canonical_json(&doc).as_bytes()))
}

/// Topological order, breaking ties by document order.
pub fn topo_order(spec: &GraphSpec) -> Option<Vec<usize>> {
    let pos: HashMap<&str, usize> = spec.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let mut indeg = vec![0usize; spec.nodes.len()];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); spec.nodes.len()];
    for e in &spec.edges {
        let (a, b) = (*pos.get(e.source.as_str())?, *pos.get(e.target.as_str())?);
        out[a].push(b);
        indeg[b] += 1;
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..indeg.len()).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(indeg.len());
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in &out[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.insert(j);
            }
        }
    }
    (order.len() == spec.nodes.len()).then_some(order)
}

/// Receives every status change, in order, from the single writer.
pub type Observer<'a> = &'a (dyn Fn(&str, &NodeResult) + Sync);

pub struct Engine {
    registry: Registry,
    cache: Mutex<HashMap<String, Arc<Payload>>>,
}

struct Prepared<'a> {
    id: &'a str,
    kind: &'a Arc<dyn NodeKind>,
    params: &'a Value,
    /// `(port, source id)` in port-declaration then document order.
    inputs: Vec<(String, String)>,
}

impl Engine {
    pub fn new(registry: Registry) -> Self {
        Self { registry, cache: Mutex::new(HashMap::new()) }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn clear_cache(&self) {
        self.cache.lock().expect("cache lock").clear();
    }

    pub fn execute(&self, spec: &GraphSpec, ctx: &RunContext, parallelism: usize) -> Result<RunRecord> {
        self.execute_observed(spec, ctx, parallelism, &|_, _| {})
    }

    pub fn execute_observed(
        &self,
        spec: &GraphSpec,
        ctx: &RunContext,
        parallelism: usize,
        observer: Observer<'_>,
    ) -> Result<RunRecord> {
        let diagnostics = validate(spec, &self.registry);
        if !diagnostics.is_empty() {
            return Err(Error::Invalid(diagnostics));
        }
        let start = Instant::now();
        let parallelism = parallelism.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;

        let order = topo_order(spec).expect("validated graphs are acyclic");
        let prepared: Vec<Prepared> = order.iter().map(|&i| self.prepare(spec, i)).collect();
        let mut results: BTreeMap<String, NodeResult> = BTreeMap::new();
        for p in &prepared {
            let r = NodeResult::with_status(Status::Pending);
            observer(p.id, &r);
            results.insert(p.id.to_string(), r);
        }

        loop {
            let mut wave = Vec::new();
            for p in &prepared {
                if results[p.id].status != Status::Pending {
                    continue;
                }
                let states: Vec<Status> = p.inputs.iter().map(|(_, src)| results[src].status).collect();
                if states.iter().any(|s| matches!(s, Status::Error | Status::SkippedUpstream)) {
                    let r = NodeResult::with_status(Status::SkippedUpstream);
                    observer(p.id, &r);
                    results.insert(p.id.to_string(), r);
                } else if states.iter().all(|s| *s == Status::Ok) {
                    wave.push(p);
                }
            }
            if wave.is_empty() {
                break;
            }
            for p in &wave {
                let r = NodeResult::with_status(Status::Running);
                observer(p.id, &r);
                results.insert(p.id.to_string(), r);
            }
            let done: Vec<NodeResult> = {
                let results = &results;
                pool.install(|| wave.par_iter().map(|p| self.run_node(p, results, ctx)).collect())
            };
            for (p, r) in wave.iter().zip(done) {
                observer(p.id, &r);
                results.insert(p.id.to_string(), r);
            }
        }

        Ok(RunRecord {
            engine_version: ENGINE_VERSION.to_string(),
            spec: spec.clone(),
            seed: ctx.seed,
            parallelism,
            nodes: results,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    fn prepare<'a>(&'a self, spec: &'a GraphSpec, i: usize) -> Prepared<'a> {
        let n = &spec.nodes[i];
        let kind = self.registry.get(&n.node_type).expect("validated node type");
        let mut inputs = Vec::new();
        for port in kind.inputs() {
            for e in spec.incoming(&n.id).filter(|e| e.port == port.name) {
                inputs.push((e.port.clone(), e.source.clone()));
            }
        }
        Prepared { id: &n.id, kind, params: &n.params, inputs }
    }

    fn run_node(&self, p: &Prepared, results: &BTreeMap<String, NodeResult>, ctx: &RunContext) -> NodeResult {
        let started = Instant::now();
        let mut r = NodeResult::with_status(Status::Error);
        let fail = |mut r: NodeResult, msg: String| {
            r.error = Some(msg);
            r.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            r
        };
        let source = match catch_unwind(AssertUnwindSafe(|| p.kind.source_digest(p.params, ctx))) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return fail(r, e),
            Err(panic) => return fail(r, panic_message(panic)),
        };
        let upstream: Vec<(String, String)> = p
            .inputs
            .iter()
            .map(|(port, src)| (port.clone(), results[src].cache_key.clone().expect("ok nodes carry keys")))
            .collect();
        let key = cache_key(p.kind.name(), p.params, &upstream, source.as_deref(), ctx.seed);
        r.cache_key = Some(key.clone());
        r.source = source;

        let hit = self.cache.lock().expect("cache lock").get(&key).cloned();
        let (payload, from_cache) = match hit {
            Some(payload) => (payload, true),
            None => {
                let mut inputs = Inputs::default();
                for (port, src) in &p.inputs {
                    let payload = results[src].payload.clone().expect("ok nodes carry payloads");
                    inputs.ports.entry(port.clone()).or_default().push(payload);
                }
                match catch_unwind(AssertUnwindSafe(|| p.kind.run(p.params, &inputs, ctx))) {
                    Ok(Ok(payload)) if payload.kind() == p.kind.output() => {
                        let payload = Arc::new(payload);
                        self.cache.lock().expect("cache lock").insert(key, payload.clone());
                        (payload, false)
                    }
                    Ok(Ok(payload)) => {
                        let msg = format!("node produced {} instead of {}", payload.kind(), p.kind.output());
                        return fail(r, msg);
                    }
                    Ok(Err(e)) => return fail(r, e),
                    Err(panic) => return fail(r, panic_message(panic)),
                }
            }
        };
        r.status = Status::Ok;
        r.digest = Some(payload.digest());
        r.payload = Some(payload);
        r.from_cache = from_cache;
        r.elapsed_ms = if from_cache { 0.0 } else { started.elapsed().as_secs_f64() * 1e3 };
        r
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    let msg = p
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into());
    format!("node panicked: {msg}")
}
