//! Loading tables and images, feature extraction and train/validation splits.

use std::sync::Arc;

use radiowb_analytics::FeatureTable;
use radiowb_core::dvol::read_volume;
use radiowb_core::{extract_feature_vector, ExtractionSettings, RoiPolygon};
use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{err, Simple, ROIS, TABLE};
use crate::payload::{Payload, PayloadKind, RoiSet, TablePayload};
use crate::registry::{Inputs, NodeKind, PortSpec, RunContext};

const ROIS_IN: &[PortSpec] = &[PortSpec::one("rois", ROIS)];
const TABLE_IN: &[PortSpec] = &[PortSpec::one("table", TABLE)];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableLoader {
    path: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageLoader {
    manifest: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Extract {
    #[serde(default)]
    settings: Option<ExtractionSettings>,
    /// LoG scales (mm) added to the default image set.
    #[serde(default)]
    log_sigmas: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitParams {
    #[serde(default = "default_fraction")]
    fraction: f64,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default = "yes")]
    stratified: bool,
}

fn default_fraction() -> f64 {
    0.8
}
fn yes() -> bool {
    true
}

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn load_manifest(p: &ImageLoader, ctx: &RunContext) -> Result<RoiSet, String> {
    let bytes = ctx.read(&p.manifest)?;
    serde_json::from_slice(&bytes).map_err(|e| format!("bad manifest `{}`: {e}", p.manifest))
}

pub(super) fn kinds() -> Vec<Arc<dyn NodeKind>> {
    vec![
        Arc::new(
            Simple::new("table-loader", "data", &[], PayloadKind::Table, |p: TableLoader, _, ctx| {
                let text = String::from_utf8(ctx.read(&p.path)?).map_err(err)?;
                Ok(Payload::table(FeatureTable::from_csv(&text).map_err(err)?))
            })
            .check(|p| if p.path.is_empty() { vec!["path must not be empty".into()] } else { Vec::new() })
            .source(|p, ctx| Ok(Some(sha(&ctx.read(&p.path)?)))),
        ),
        Arc::new(
            Simple::new("image-loader", "data", &[], PayloadKind::Rois, |p: ImageLoader, _, ctx| {
                let set = load_manifest(&p, ctx)?;
                if set.items.is_empty() {
                    return Err("manifest lists no rois".into());
                }
                Ok(Payload::Rois(set))
            })
            .check(|p| if p.manifest.is_empty() { vec!["manifest must not be empty".into()] } else { Vec::new() })
            .source(|p, ctx| {
                let mut h = Sha256::new();
                h.update(ctx.read(&p.manifest)?);
                for item in load_manifest(p, ctx)?.items {
                    h.update(ctx.read(&item.volume)?);
                    h.update(ctx.read(&item.roi)?);
                }
                Ok(Some(hex::encode(h.finalize())))
            }),
        ),
        Arc::new(Simple::new("extract-features", "data", ROIS_IN, PayloadKind::Table, extract).check(|p| {
            if p.log_sigmas.iter().any(|s| !(*s > 0.0)) {
                vec!["log_sigmas must be positive".into()]
            } else {
                Vec::new()
            }
        })),
        Arc::new(
            Simple::new("split", "data", TABLE_IN, PayloadKind::Table, |p: SplitParams, i, ctx| {
                let t = i.table("table")?;
                let table = t.table.split_random(p.fraction, p.seed.unwrap_or(ctx.seed), p.stratified).map_err(err)?;
                Ok(Payload::Table(TablePayload { table, chain: t.chain.clone(), selection: None }))
            })
            .check(|p| {
                if p.fraction > 0.0 && p.fraction < 1.0 {
                    Vec::new()
                } else {
                    vec!["fraction must lie strictly between 0 and 1".into()]
                }
            }),
        ),
    ]
}

fn extract(p: Extract, inputs: &Inputs, ctx: &RunContext) -> Result<Payload, String> {
    let Some(Payload::Rois(set)) = inputs.get("rois") else {
        return Err("input `rois` is not an roi set".into());
    };
    let settings = p.settings.unwrap_or_else(|| ExtractionSettings::with_log(&p.log_sigmas));
    let vectors = set
        .items
        .par_iter()
        .map(|item| {
            let vol = read_volume(ctx.resolve(&item.volume)?).map_err(|e| format!("{}: {e}", item.volume))?;
            let text = String::from_utf8(ctx.read(&item.roi)?).map_err(err)?;
            let roi = RoiPolygon::from_json(&text).map_err(|e| format!("{}: {e}", item.roi))?;
            extract_feature_vector(&vol, &roi, &settings).map_err(|e| format!("roi `{}`: {e}", item.roi_id))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let columns = vectors[0].names.clone();
    let row_ids = set.items.iter().map(|i| i.roi_id.clone()).collect();
    let values = vectors.into_iter().map(|v| v.values).collect();
    let mut table = FeatureTable::new(row_ids, columns, values).map_err(err)?;
    table.labels = set.items.iter().map(|i| i.label).collect();
    table.split = set.items.iter().map(|i| i.split).collect();
    table.validate().map_err(err)?;
    Ok(Payload::table(table))
}
