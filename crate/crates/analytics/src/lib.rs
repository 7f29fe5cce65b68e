//! Numerical back end for radiomics studies: feature tables, scaling,
//! feature selection, binary classifiers, evaluation metrics, clustering,
//! embeddings and hyperparameter search.
//!
//! Everything operates on a [`FeatureTable`] whose rows are ROIs. Fitting
//! uses the rows marked `train` (or every row when none are), and every
//! fitted transform can be replayed on new rows through a
//! [`pipeline::FittedStep`] chain.

pub mod cluster;
pub mod cv;
pub mod ensemble;
mod error;
pub mod expr;
pub mod heatmap;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod scale;
pub mod search;
pub mod select;
mod table;
pub mod tsne;

pub use error::{Error, Result};
pub use metrics::{evaluate, Metrics};
pub use models::{train_classifier, ModelSpec, TrainedModel};
pub use table::{FeatureTable, Split};
