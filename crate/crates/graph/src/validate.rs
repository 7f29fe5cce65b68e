//! Static checks on a graph document.

use std::collections::{HashMap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::registry::{Registry, OUTPUT_PORT};
use crate::spec::{GraphSpec, SPEC_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    /// Offending node ids.
    pub nodes: Vec<String>,
    /// Offending ports as `node.port`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ports: Vec<String>,
}

impl Diagnostic {
    fn new(code: &str, message: String, nodes: Vec<String>) -> Self {
        Self { code: code.into(), message, nodes, ports: Vec::new() }
    }

    fn ports(mut self, ports: Vec<String>) -> Self {
        self.ports = ports;
        self
    }
}

/// Every problem in the document; empty means the graph may run.
pub fn validate(spec: &GraphSpec, registry: &Registry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if spec.version != SPEC_VERSION {
        out.push(Diagnostic::new(
            "unsupported-version",
            format!("version `{}` is not supported (expected `{SPEC_VERSION}`)", spec.version),
            Vec::new(),
        ));
    }
    if spec.nodes.is_empty() {
        out.push(Diagnostic::new("empty-graph", "graph has no nodes".into(), Vec::new()));
    }

    let mut seen = HashSet::new();
    for n in &spec.nodes {
        if n.id.is_empty() {
            out.push(Diagnostic::new("invalid-id", "node id must not be empty".into(), vec![n.id.clone()]));
        }
        if !seen.insert(n.id.as_str()) {
            out.push(Diagnostic::new(
                "duplicate-id",
                format!("node id `{}` is used more than once", n.id),
                vec![n.id.clone()],
            ));
        }
    }
    let by_id: HashMap<&str, &crate::spec::NodeSpec> = spec.nodes.iter().map(|n| (n.id.as_str(), n)).collect();

    for n in &spec.nodes {
        match registry.get(&n.node_type) {
            None => out.push(Diagnostic::new(
                "unknown-type",
                format!("node `{}` has unknown type `{}`", n.id, n.node_type),
                vec![n.id.clone()],
            )),
            Some(kind) => {
                for msg in kind.check_params(&n.params) {
                    out.push(Diagnostic::new("invalid-params", format!("node `{}`: {msg}", n.id), vec![n.id.clone()]));
                }
            }
        }
    }

    let mut per_port: HashMap<(&str, &str), usize> = HashMap::new();
    for e in &spec.edges {
        let (src, dst) = (by_id.get(e.source.as_str()), by_id.get(e.target.as_str()));
        for (id, found) in [(&e.source, src.is_some()), (&e.target, dst.is_some())] {
            if !found {
                out.push(Diagnostic::new(
                    "dangling-edge",
                    format!("edge {} -> {}.{} references missing node `{id}`", e.source, e.target, e.port),
                    vec![id.clone()],
                ));
            }
        }
        let (Some(src), Some(dst)) = (src, dst) else {
            continue;
        };
        let (Some(sk), Some(dk)) = (registry.get(&src.node_type), registry.get(&dst.node_type)) else {
            continue;
        };
        let Some(port) = dk.port(&e.port) else {
            let names: Vec<&str> = dk.inputs().iter().map(|p| p.name).collect();
            out.push(
                Diagnostic::new(
                    "unknown-port",
                    format!(
                        "`{}` ({}) has no input port `{}`; ports: [{}]",
                        dst.id,
                        dst.node_type,
                        e.port,
                        names.join(", ")
                    ),
                    vec![dst.id.clone()],
                )
                .ports(vec![format!("{}.{}", dst.id, e.port)]),
            );
            continue;
        };
        *per_port.entry((dst.id.as_str(), port.name)).or_default() += 1;
        if !port.accepts.contains(&sk.output()) {
            let accepts: Vec<String> = port.accepts.iter().map(|k| k.to_string()).collect();
            out.push(
                Diagnostic::new(
                    "type-mismatch",
                    format!(
                        "`{}.{OUTPUT_PORT}` produces {} but `{}.{}` accepts {}",
                        src.id,
                        sk.output(),
                        dst.id,
                        port.name,
                        accepts.join(" | ")
                    ),
                    vec![src.id.clone(), dst.id.clone()],
                )
                .ports(vec![format!("{}.{OUTPUT_PORT}", src.id), format!("{}.{}", dst.id, port.name)]),
            );
        }
    }

    for n in &spec.nodes {
        let Some(kind) = registry.get(&n.node_type) else {
            continue;
        };
        for port in kind.inputs() {
            let count = per_port.get(&(n.id.as_str(), port.name)).copied().unwrap_or(0);
            let slot = vec![format!("{}.{}", n.id, port.name)];
            if port.required && count == 0 {
                out.push(
                    Diagnostic::new(
                        "missing-input",
                        format!("required input `{}.{}` is not connected", n.id, port.name),
                        vec![n.id.clone()],
                    )
                    .ports(slot),
                );
            } else if !port.multi && count > 1 {
                out.push(
                    Diagnostic::new(
                        "multiple-inputs",
                        format!("input `{}.{}` accepts one edge but has {count}", n.id, port.name),
                        vec![n.id.clone()],
                    )
                    .ports(slot),
                );
            }
        }
    }

    out.extend(cycles(spec));
    out
}

fn cycles(spec: &GraphSpec) -> Vec<Diagnostic> {
    let mut g = DiGraph::<&str, ()>::new();
    let mut idx = HashMap::new();
    for n in &spec.nodes {
        idx.entry(n.id.as_str()).or_insert_with(|| g.add_node(n.id.as_str()));
    }
    for e in &spec.edges {
        if let (Some(&a), Some(&b)) = (idx.get(e.source.as_str()), idx.get(e.target.as_str())) {
            g.add_edge(a, b, ());
        }
    }
    let mut out = Vec::new();
    let mut sccs = tarjan_scc(&g);
    sccs.reverse();
    for scc in sccs {
        let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
        if cyclic {
            let mut nodes: Vec<String> = scc.iter().map(|&i| g[i].to_string()).collect();
            nodes.sort();
            out.push(Diagnostic::new("cycle", format!("cycle through {}", nodes.join(", ")), nodes));
        }
    }
    out
}
