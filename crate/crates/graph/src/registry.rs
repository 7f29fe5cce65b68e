//! Node types, their ports and the registry that maps type names to them.

use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::payload::{ModelPayload, Payload, PayloadKind, TablePayload};

/// Name of every node's single output.
pub const OUTPUT_PORT: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PortSpec {
    pub name: &'static str,
    pub accepts: &'static [PayloadKind],
    pub required: bool,
    /// Accepts any number of edges, delivered in document order.
    pub multi: bool,
}

impl PortSpec {
    pub const fn one(name: &'static str, accepts: &'static [PayloadKind]) -> Self {
        Self { name, accepts, required: true, multi: false }
    }

    pub const fn optional(name: &'static str, accepts: &'static [PayloadKind]) -> Self {
        Self { name, accepts, required: false, multi: false }
    }

    pub const fn many(name: &'static str, accepts: &'static [PayloadKind]) -> Self {
        Self { name, accepts, required: true, multi: true }
    }
}

/// Execution environment shared by every node of a run.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub data_dir: PathBuf,
    /// Used by nodes whose parameters leave `seed` unset.
    pub seed: u64,
}

impl RunContext {
    pub fn new(data_dir: impl Into<PathBuf>, seed: u64) -> Self {
        Self { data_dir: data_dir.into(), seed }
    }

    /// Resolves a data-relative path, refusing anything that escapes the
    /// data directory.
    pub fn resolve(&self, rel: &str) -> Result<PathBuf, String> {
        let p = Path::new(rel);
        if p.components().any(|c| !matches!(c, Component::Normal(_) | Component::CurDir)) {
            return Err(format!("path `{rel}` must be relative to the data directory"));
        }
        Ok(self.data_dir.join(p))
    }

    pub fn read(&self, rel: &str) -> Result<Vec<u8>, String> {
        let path = self.resolve(rel)?;
        std::fs::read(&path).map_err(|e| format!("cannot read `{rel}`: {e}"))
    }
}

/// Upstream payloads grouped by input port.
#[derive(Debug, Default, Clone)]
pub struct Inputs {
    pub ports: BTreeMap<String, Vec<Arc<Payload>>>,
}

impl Inputs {
    pub fn all(&self, port: &str) -> &[Arc<Payload>] {
        self.ports.get(port).map_or(&[], Vec::as_slice)
    }

    pub fn get(&self, port: &str) -> Option<&Payload> {
        self.all(port).first().map(|p| p.as_ref())
    }

    pub fn table(&self, port: &str) -> Result<&TablePayload, String> {
        self.get(port).and_then(Payload::as_table).ok_or_else(|| format!("input `{port}` is not a table"))
    }

    pub fn model(&self, port: &str) -> Result<&ModelPayload, String> {
        self.get(port).and_then(Payload::as_model).ok_or_else(|| format!("input `{port}` is not a model"))
    }

    pub fn models(&self, port: &str) -> Result<Vec<&ModelPayload>, String> {
        self.all(port).iter().map(|p| p.as_model().ok_or_else(|| format!("input `{port}` is not a model"))).collect()
    }
}

/// One node type. Implementations must be pure functions of their
/// parameters, inputs and the files they read through the context.
pub trait NodeKind: Send + Sync {
    fn name(&self) -> &'static str;

    fn category(&self) -> &'static str;

    fn inputs(&self) -> &'static [PortSpec];

    fn output(&self) -> PayloadKind;

    /// Parameter problems; empty when the document is acceptable.
    fn check_params(&self, params: &Value) -> Vec<String>;

    /// Digest of external data the node reads, mixed into its cache key.
    fn source_digest(&self, _params: &Value, _ctx: &RunContext) -> Result<Option<String>, String> {
        Ok(None)
    }

    fn run(&self, params: &Value, inputs: &Inputs, ctx: &RunContext) -> Result<Payload, String>;

    fn port(&self, name: &str) -> Option<&'static PortSpec> {
        self.inputs().iter().find(|p| p.name == name)
    }
}

/// Deserializes a parameter document, mapping errors to messages.
pub fn params<P: DeserializeOwned>(v: &Value) -> Result<P, String> {
    serde_json::from_value(v.clone()).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeTypeInfo {
    #[serde(rename = "type")]
    pub node_type: &'static str,
    pub category: &'static str,
    pub inputs: Vec<PortSpec>,
    pub output: PayloadKind,
}

#[derive(Clone, Default)]
pub struct Registry {
    kinds: BTreeMap<&'static str, Arc<dyn NodeKind>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every built-in node type.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        for k in crate::nodes::all() {
            r.register(k);
        }
        r
    }

    pub fn register(&mut self, kind: Arc<dyn NodeKind>) -> &mut Self {
        self.kinds.insert(kind.name(), kind);
        self
    }

    pub fn with(mut self, kind: Arc<dyn NodeKind>) -> Self {
        self.register(kind);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn NodeKind>> {
        self.kinds.get(name)
    }

    /// The port table clients use to refuse illegal edges.
    pub fn describe(&self) -> Vec<NodeTypeInfo> {
        self.kinds
            .values()
            .map(|k| NodeTypeInfo {
                node_type: k.name(),
                category: k.category(),
                inputs: k.inputs().to_vec(),
                output: k.output(),
            })
            .collect()
    }
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.kinds.keys()).finish()
    }
}
