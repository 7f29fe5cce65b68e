//! Computational graphs over radiomics pipelines.
//!
//! A [`GraphSpec`] names typed nodes (loaders, scalers, selectors, models,
//! evaluators, plots) and the edges between their ports. [`validate`]
//! reports every structural problem at once; an [`Engine`] runs a valid
//! graph with content-addressed caching and per-branch error isolation;
//! an [`ExperimentStore`] keeps finished runs and re-tests their models on
//! new tables without refitting.

pub mod engine;
mod error;
pub mod experiment;
pub mod nodes;
pub mod payload;
pub mod registry;
pub mod spec;
pub mod validate;

pub use engine::{cache_key, Engine, NodeResult, RunRecord, Status, ENGINE_VERSION};
pub use error::{Error, Result};
pub use experiment::{ExperimentRecord, ExperimentStore, ExperimentSummary, Retest};
pub use payload::{Payload, PayloadKind};
pub use registry::{Inputs, NodeKind, NodeTypeInfo, PortSpec, Registry, RunContext};
pub use spec::{Edge, GraphSpec, NodeSpec};
pub use validate::{validate, Diagnostic};
