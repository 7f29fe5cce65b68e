//! Values that flow along edges.

use std::fmt;

use radiowb_analytics::cluster::KMeans;
use radiowb_analytics::cv::{CvRow, GridSearchResult};
use radiowb_analytics::heatmap::HeatmapOrder;
use radiowb_analytics::pipeline::FittedStep;
use radiowb_analytics::search::SearchOutcome;
use radiowb_analytics::select::Selection;
use radiowb_analytics::tsne::Embedding;
use radiowb_analytics::{FeatureTable, Metrics, ModelSpec, Split, TrainedModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    Table,
    Model,
    Metrics,
    Plot,
    Rois,
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PayloadKind::Table => "table",
            PayloadKind::Model => "model",
            PayloadKind::Metrics => "metrics",
            PayloadKind::Plot => "plot",
            PayloadKind::Rois => "rois",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Table(TablePayload),
    Model(Box<ModelPayload>),
    Metrics(MetricsPayload),
    Plot(PlotPayload),
    Rois(RoiSet),
}

/// A feature table together with the fitted steps that produced it from
/// the loaded data. `selection` holds the scores when the last step was a
/// selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePayload {
    pub table: FeatureTable,
    #[serde(default)]
    pub chain: Vec<FittedStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
}

/// A fitted model plus the table it was fitted on, so an evaluation node
/// can score the held-out rows without a second input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPayload {
    pub model: TrainedModel,
    pub data: TablePayload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv: Option<CvReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchOutcome>,
}

/// Grid-search results without the refitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub grid: Vec<ModelSpec>,
    pub cv: Vec<CvRow>,
    pub mean_auc: Vec<Option<f64>>,
    pub best_cell: usize,
    pub warnings: Vec<String>,
}

impl From<GridSearchResult> for CvReport {
    fn from(g: GridSearchResult) -> Self {
        Self { grid: g.grid, cv: g.cv, mean_auc: g.mean_auc, best_cell: g.best_cell, warnings: g.warnings }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsPayload {
    pub metrics: Metrics,
    pub split: Split,
    pub row_ids: Vec<String>,
    pub labels: Vec<u8>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plot", rename_all = "kebab-case")]
pub enum PlotPayload {
    Heatmap { row_ids: Vec<String>, columns: Vec<String>, order: HeatmapOrder },
    Tsne { row_ids: Vec<String>, labels: Vec<Option<u8>>, embedding: Embedding },
    Kmeans { row_ids: Vec<String>, labels: Vec<Option<u8>>, clusters: KMeans },
}

/// ROIs listed by an image manifest, paths relative to the data directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSet {
    pub items: Vec<RoiItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiItem {
    pub roi_id: String,
    pub volume: String,
    pub roi: String,
    #[serde(default)]
    pub label: Option<u8>,
    #[serde(default = "unassigned")]
    pub split: Split,
}

fn unassigned() -> Split {
    Split::Unassigned
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Table(_) => PayloadKind::Table,
            Payload::Model(_) => PayloadKind::Model,
            Payload::Metrics(_) => PayloadKind::Metrics,
            Payload::Plot(_) => PayloadKind::Plot,
            Payload::Rois(_) => PayloadKind::Rois,
        }
    }

    pub fn table(table: FeatureTable) -> Self {
        Payload::Table(TablePayload { table, chain: Vec::new(), selection: None })
    }

    /// SHA-256 of the serialized payload.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("payload serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn as_table(&self) -> Option<&TablePayload> {
        match self {
            Payload::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_model(&self) -> Option<&ModelPayload> {
        match self {
            Payload::Model(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_metrics(&self) -> Option<&MetricsPayload> {
        match self {
            Payload::Metrics(m) => Some(m),
            _ => None,
        }
    }
}
