//! The graph document exchanged with clients.
//!
//! ```json
//! {"version": "1",
//!  "nodes": [{"id": "load", "type": "table-loader", "params": {"path": "t.csv"}}],
//!  "edges": [["load", "scale", "table"]]}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Result;

pub const SPEC_VERSION: &str = "1";

fn default_version() -> String {
    SPEC_VERSION.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(default = "default_version")]
    pub version: String,
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(rename = "type")]
    pub node_type: String,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// `[source, target, input port]` on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(String, String, String)", into = "(String, String, String)")]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub port: String,
}

impl Edge {
    pub fn new(source: impl Into<String>, target: impl Into<String>, port: impl Into<String>) -> Self {
        Self { source: source.into(), target: target.into(), port: port.into() }
    }
}

impl From<(String, String, String)> for Edge {
    fn from((source, target, port): (String, String, String)) -> Self {
        Self { source, target, port }
    }
}

impl From<Edge> for (String, String, String) {
    fn from(e: Edge) -> Self {
        (e.source, e.target, e.port)
    }
}

impl NodeSpec {
    pub fn new(id: impl Into<String>, node_type: impl Into<String>, params: Value) -> Self {
        Self { id: id.into(), node_type: node_type.into(), params }
    }
}

impl GraphSpec {
    pub fn new(nodes: Vec<NodeSpec>, edges: Vec<Edge>) -> Self {
        Self { version: default_version(), nodes, edges }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph spec serializes")
    }

    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Edges entering `id`, in document order.
    pub fn incoming<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.target == id)
    }
}

/// JSON with object keys sorted at every level and no whitespace.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn edges_are_triples_on_the_wire() {
        let spec = GraphSpec::new(
            vec![NodeSpec::new("a", "table-loader", json!({"path": "x.csv"})), NodeSpec::new("b", "scaler", json!({}))],
            vec![Edge::new("a", "b", "table")],
        );
        let v: Value = serde_json::from_str(&spec.render()).unwrap();
        assert_eq!(v["edges"], json!([["a", "b", "table"]]));
        assert_eq!(GraphSpec::parse(&spec.render()).unwrap(), spec);
    }

    #[test]
    fn missing_version_and_params_default() {
        let spec = GraphSpec::parse(r#"{"nodes":[{"id":"a","type":"split"}]}"#).unwrap();
        assert_eq!(spec.version, "1");
        assert_eq!(spec.nodes[0].params, json!({}));
        assert!(spec.edges.is_empty());
    }

    #[test]
    fn canonical_json_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"b":1,"a":{"y":[1,2],"x":null}}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"a":{"x":null,"y":[1,2]},"b":1}"#).unwrap();
        assert_eq!(canonical_json(&a), canonical_json(&b));
        assert_eq!(canonical_json(&a), r#"{"a":{"x":null,"y":[1,2]},"b":1}"#);
    }
}
