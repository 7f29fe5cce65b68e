//! Built-in node types.

mod data;
pub(crate) mod evaluate;
mod model;
mod prep;

use std::marker::PhantomData;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::payload::{Payload, PayloadKind};
use crate::registry::{params, Inputs, NodeKind, PortSpec, RunContext};

pub use model::spec_from_config;

pub(crate) const TABLE: &[PayloadKind] = &[PayloadKind::Table];
pub(crate) const MODEL: &[PayloadKind] = &[PayloadKind::Model];
pub(crate) const ROIS: &[PayloadKind] = &[PayloadKind::Rois];

type RunFn<P> = fn(P, &Inputs, &RunContext) -> Result<Payload, String>;
type CheckFn<P> = fn(&P) -> Vec<String>;
type SourceFn<P> = fn(&P, &RunContext) -> Result<Option<String>, String>;

/// A node type described by a typed parameter struct and plain functions.
pub struct Simple<P> {
    pub name: &'static str,
    pub category: &'static str,
    pub inputs: &'static [PortSpec],
    pub output: PayloadKind,
    pub run: RunFn<P>,
    pub check: CheckFn<P>,
    pub source: Option<SourceFn<P>>,
    _p: PhantomData<fn() -> P>,
}

impl<P> Simple<P> {
    pub fn new(
        name: &'static str,
        category: &'static str,
        inputs: &'static [PortSpec],
        output: PayloadKind,
        run: RunFn<P>,
    ) -> Self {
        Self { name, category, inputs, output, run, check: |_| Vec::new(), source: None, _p: PhantomData }
    }

    pub fn check(mut self, check: CheckFn<P>) -> Self {
        self.check = check;
        self
    }

    pub fn source(mut self, source: SourceFn<P>) -> Self {
        self.source = Some(source);
        self
    }
}

impl<P: DeserializeOwned + 'static> NodeKind for Simple<P> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn category(&self) -> &'static str {
        self.category
    }

    fn inputs(&self) -> &'static [PortSpec] {
        self.inputs
    }

    fn output(&self) -> PayloadKind {
        self.output
    }

    fn check_params(&self, v: &Value) -> Vec<String> {
        match params::<P>(v) {
            Ok(p) => (self.check)(&p),
            Err(e) => vec![e],
        }
    }

    fn source_digest(&self, v: &Value, ctx: &RunContext) -> Result<Option<String>, String> {
        match self.source {
            Some(f) => f(&params::<P>(v)?, ctx),
            None => Ok(None),
        }
    }

    fn run(&self, v: &Value, inputs: &Inputs, ctx: &RunContext) -> Result<Payload, String> {
        (self.run)(params::<P>(v)?, inputs, ctx)
    }
}

pub(crate) fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub(crate) fn all() -> Vec<Arc<dyn NodeKind>> {
    let mut v = Vec::new();
    v.extend(data::kinds());
    v.extend(prep::kinds());
    v.extend(model::kinds());
    v.extend(evaluate::kinds());
    v
}
