//! The workbench behind the HTTP routes: studies, ROIs, extraction jobs,
//! segmentation tools, graph runs and experiment history.

use std::collections::BTreeMap;
use std::io::{BufReader, Cursor};
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex};

use base64::Engine as _;
use radiowb_analytics::FeatureTable;
use radiowb_core::roi::rasterize_dims;
use radiowb_core::segmentation::{copy_roi, fit_boundary, mask_to_roi, CancelToken, GrowRequest, Polarity};
use radiowb_core::{dvol, Annotations, ExtractionSettings, FeatureVector, RoiPolygon, SeriesGeometry, SlicePolygon};
use radiowb_graph::{
    validate, Diagnostic, Engine, ExperimentSummary, GraphSpec, NodeTypeInfo, Payload, Registry, Retest, RunContext,
    Status,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{ApiError, ApiResult};
use crate::jobs::{Job, JobQueue};
use crate::runs::{RunEntry, RunPhase, RunView, Runs};
use crate::store::{check_id, feature_key, now_micros, SeriesRecord, Stores, StudyRecord};

#[derive(Debug, Clone)]
pub struct Config {
    /// Root of the four stores.
    pub root: PathBuf,
    /// Directory that volume paths and run data selections resolve against.
    pub data_dir: PathBuf,
    /// Extraction worker threads.
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesUpload {
    pub series_id: String,
    #[serde(default)]
    pub modality: Option<String>,
    /// DVOL file relative to the data directory.
    #[serde(default)]
    pub path: Option<String>,
    /// Base64-encoded DVOL bytes.
    #[serde(default)]
    pub dvol: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateStudy {
    #[serde(default)]
    pub study_id: Option<String>,
    pub series: Vec<SeriesUpload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyView {
    pub study_id: String,
    pub created_at: u64,
    pub updated_at: u64,
    pub series: Vec<SeriesRecord>,
    pub rois: Vec<RoiPolygon>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitRoi {
    #[serde(default)]
    pub roi_id: Option<String>,
    pub series_id: String,
    pub slices: Vec<SlicePolygon>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    /// Full extraction settings; defaults to the standard image set.
    #[serde(default)]
    pub settings: Option<ExtractionSettings>,
    /// LoG scales (mm) added to the default settings.
    #[serde(default)]
    pub log_sigmas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submitted {
    pub roi_id: String,
    pub job: Job,
}

pub enum FeatureLookup {
    Ready(FeatureVector),
    Pending(Job),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkRequest {
    /// ROIs joining the path ROI's lesion group.
    #[serde(default)]
    pub with: Vec<String>,
    #[serde(default)]
    pub group_id: Option<String>,
    /// Labels written on every member after linking.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linked {
    pub group_id: String,
    pub rois: Vec<RoiPolygon>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionGrow {
    pub series_id: String,
    /// Bounding curve(s) drawn by the user.
    pub slices: Vec<SlicePolygon>,
    pub polarity: Polarity,
    #[serde(default)]
    pub spread_3d: bool,
    #[serde(default)]
    pub max_voxels: Option<usize>,
    #[serde(default)]
    pub seed_fraction: Option<f64>,
    #[serde(default)]
    pub threshold_sigmas: Option<f64>,
    #[serde(default)]
    pub roi_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grown {
    pub roi: RoiPolygon,
    pub voxel_count: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CopyRequest {
    pub target_series: String,
    /// Id of the copy; defaults to the source id.
    #[serde(default)]
    pub roi_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Where a run reads its data from.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSelection {
    /// Subdirectory of the data directory.
    #[serde(default)]
    pub dir: Option<String>,
    /// Study whose ROIs are exported as `features.csv` and `manifest.json`.
    #[serde(default)]
    pub study: Option<String>,
    /// ROI label used as the class.
    #[serde(default)]
    pub label: Option<String>,
    /// Label value mapped to class 1; without it values must be `0` or `1`.
    #[serde(default)]
    pub positive: Option<String>,
    /// Settings hash of the exported features.
    #[serde(default)]
    pub settings: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRequest {
    pub graph: GraphSpec,
    #[serde(default)]
    pub data: DataSelection,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    /// Write an experiment record when the run finishes.
    #[serde(default = "yes")]
    pub save: bool,
}

fn default_parallelism() -> usize {
    4
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeOutput {
    pub run_id: String,
    pub node_id: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Arc<Payload>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetestRequest {
    /// Feature table as CSV text.
    #[serde(default)]
    pub table: Option<String>,
    /// CSV file relative to the data directory.
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub node: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deleted {
    pub record_id: String,
    pub freed_models: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub z: usize,
    pub dims: [usize; 2],
    /// x-fastest voxel values.
    pub values: Vec<f64>,
}

pub struct Workbench {
    stores: Arc<Stores>,
    /// Guards every annotation write, serializing them per study and beyond.
    annotations: Mutex<Annotations>,
    jobs: JobQueue,
    runs: Runs,
    engine: Arc<Engine>,
    data_dir: PathBuf,
}

/// Joins a client-supplied relative path under `base`.
fn resolve_under(base: &Path, rel: &str) -> ApiResult<PathBuf> {
    let p = Path::new(rel);
    if rel.is_empty() || !p.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir)) {
        return Err(ApiError::unprocessable(
            "invalid-path",
            format!("`{rel}` must be a relative path inside the data directory"),
        ));
    }
    Ok(base.join(p))
}

fn parse_label(value: Option<&String>, positive: Option<&str>) -> ApiResult<Option<u8>> {
    let Some(v) = value else { return Ok(None) };
    match positive {
        Some(p) => Ok(Some(u8::from(v == p))),
        None => match v.as_str() {
            "0" => Ok(Some(0)),
            "1" => Ok(Some(1)),
            other => Err(ApiError::unprocessable(
                "invalid-label",
                format!("label value `{other}` is not 0/1; pass `positive` to map it"),
            )),
        },
    }
}

impl Workbench {
    /// Opens the stores and rebuilds the annotation catalog from them.
    pub fn open(config: Config) -> ApiResult<Arc<Self>> {
        let stores = Arc::new(Stores::open(&config.root)?);
        let mut annotations = Annotations::new();
        for study in stores.images.studies()? {
            for s in &study.series {
                annotations.add_series(SeriesGeometry {
                    study_id: study.study_id.clone(),
                    series_id: s.series_id.clone(),
                    dims: s.dims,
                    spacing: s.spacing,
                    origin: s.origin,
                    modality: s.modality.clone(),
                });
            }
        }
        for roi in stores.masks.all()? {
            annotations.add_roi(roi)?;
        }
        Ok(Arc::new(Self {
            jobs: JobQueue::start(stores.clone(), config.workers),
            stores,
            annotations: Mutex::new(annotations),
            runs: Runs::default(),
            engine: Arc::new(Engine::new(Registry::builtin())),
            data_dir: config.data_dir,
        }))
    }

    pub fn stores(&self) -> &Stores {
        &self.stores
    }

    pub fn jobs(&self) -> &JobQueue {
        &self.jobs
    }

    fn study_record(&self, id: &str) -> ApiResult<StudyRecord> {
        self.stores.images.study(id)?.ok_or_else(|| ApiError::not_found("unknown-study", format!("no study `{id}`")))
    }

    fn view(&self, study: StudyRecord, ann: &Annotations) -> StudyView {
        let rois = study.rois.iter().filter_map(|id| ann.roi(id).cloned()).collect();
        StudyView {
            study_id: study.study_id,
            created_at: study.created_at,
            updated_at: study.updated_at,
            series: study.series,
            rois,
        }
    }

    pub fn create_study(&self, req: CreateStudy) -> ApiResult<StudyView> {
        let study_id = req.study_id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
        check_id("study", &study_id)?;
        let mut ann = self.annotations.lock().unwrap();
        if self.stores.images.study(&study_id)?.is_some() {
            return Err(ApiError::conflict("study-exists", format!("study `{study_id}` already exists")));
        }
        let mut series = Vec::new();
        for s in &req.series {
            check_id("series", &s.series_id)?;
            if ann.series(&s.series_id).is_some() || series.iter().any(|r: &SeriesRecord| r.series_id == s.series_id) {
                return Err(ApiError::conflict("series-exists", format!("series `{}` already exists", s.series_id)));
            }
            let vol = match (&s.path, &s.dvol) {
                (Some(p), None) => dvol::read_volume(resolve_under(&self.data_dir, p)?)?,
                (None, Some(b64)) => {
                    let bytes = base64::engine::general_purpose::STANDARD
                        .decode(b64)
                        .map_err(|e| ApiError::bad_request(format!("series `{}`: {e}", s.series_id)))?;
                    dvol::decode(BufReader::new(Cursor::new(bytes)))?
                }
                _ => {
                    return Err(ApiError::bad_request(format!(
                        "series `{}` needs exactly one of `path` or `dvol`",
                        s.series_id
                    )))
                }
            };
            let digest = self.stores.images.put_volume(&vol)?;
            series.push(SeriesRecord {
                series_id: s.series_id.clone(),
                modality: s.modality.clone().unwrap_or_else(|| vol.modality().to_string()),
                dims: vol.dims(),
                spacing: vol.spacing(),
                origin: vol.origin(),
                volume: digest,
            });
        }
        let now = now_micros();
        let record =
            StudyRecord { study_id: study_id.clone(), created_at: now, updated_at: now, series, rois: Vec::new() };
        self.stores.images.put_study(&record)?;
        for s in &record.series {
            ann.add_series(SeriesGeometry {
                study_id: study_id.clone(),
                series_id: s.series_id.clone(),
                dims: s.dims,
                spacing: s.spacing,
                origin: s.origin,
                modality: s.modality.clone(),
            });
        }
        Ok(self.view(record, &ann))
    }

    pub fn study(&self, id: &str) -> ApiResult<StudyView> {
        let record = self.study_record(id)?;
        let ann = self.annotations.lock().unwrap();
        Ok(self.view(record, &ann))
    }

    /// Persists the ROI and enqueues its extraction; returns before the
    /// features exist.
    pub fn submit_roi(&self, study_id: &str, req: SubmitRoi) -> ApiResult<Submitted> {
        let roi_id = req.roi_id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
        check_id("roi", &roi_id)?;
        if req.log_sigmas.iter().any(|s| !(*s > 0.0)) {
            return Err(ApiError::unprocessable("invalid-parameter", "log_sigmas must be positive"));
        }
        let settings = req.settings.unwrap_or_else(|| ExtractionSettings::with_log(&req.log_sigmas));
        let mut ann = self.annotations.lock().unwrap();
        let mut study = self.study_record(study_id)?;
        let series = study.series(&req.series_id).cloned().ok_or_else(|| {
            ApiError::not_found("unknown-series", format!("study `{study_id}` has no series `{}`", req.series_id))
                .with_details(json!({"series_id": req.series_id}))
        })?;
        if let Some(other) = ann.study_of_roi(&roi_id) {
            if other != study_id {
                return Err(ApiError::conflict("roi-exists", format!("roi `{roi_id}` belongs to study `{other}`")));
            }
        }
        let mut roi = RoiPolygon::new(roi_id.clone(), req.series_id.clone(), req.slices);
        roi.labels = req.labels;
        roi.validate()?;
        rasterize_dims(&roi, series.dims)?;

        // a resubmitted roi keeps its lesion group, whose labels follow it
        let group = ann.roi(&roi_id).and_then(|r| r.lesion_group_id.clone());
        roi.lesion_group_id = group.clone();
        ann.add_roi(roi.clone())?;
        let mut touched = vec![roi_id.clone()];
        if let Some(g) = &group {
            for (k, v) in &roi.labels {
                ann.set_label(&roi_id, k, v)?;
            }
            touched.extend(ann.rois().filter(|r| r.lesion_group_id.as_ref() == Some(g)).map(|r| r.roi_id.clone()));
        }
        for id in touched {
            self.stores.masks.put(ann.roi(&id).expect("roi exists"))?;
        }
        if !study.rois.contains(&roi_id) {
            study.rois.push(roi_id.clone());
        }
        study.updated_at = now_micros();
        self.stores.images.put_study(&study)?;
        drop(ann);

        let job = self.jobs.submit(&roi, &series.volume, &settings);
        Ok(Submitted { roi_id, job })
    }

    fn roi_and_volume(&self, roi_id: &str) -> ApiResult<(RoiPolygon, SeriesRecord)> {
        let ann = self.annotations.lock().unwrap();
        let roi =
            ann.roi(roi_id).cloned().ok_or_else(|| ApiError::from(radiowb_core::Error::UnknownRoi(roi_id.into())))?;
        let study_id = ann.study_of_roi(roi_id).expect("roi has a study").to_string();
        drop(ann);
        let series = self.study_record(&study_id)?.series(&roi.series_id).cloned().ok_or_else(|| {
            ApiError::internal(format!("series `{}` of roi `{roi_id}` is missing from its study", roi.series_id))
        })?;
        Ok((roi, series))
    }

    /// Features of the ROI's current geometry under `settings_hash`
    /// (default settings when absent).
    pub fn features(&self, roi_id: &str, settings_hash: Option<&str>) -> ApiResult<FeatureLookup> {
        let hash = settings_hash.map(str::to_string).unwrap_or_else(|| ExtractionSettings::default().hash());
        let (roi, series) = self.roi_and_volume(roi_id)?;
        let key = feature_key(roi_id, &roi.slices, &series.volume, &hash);
        if let Some(v) = self.stores.features.get(&key)? {
            return Ok(FeatureLookup::Ready(v));
        }
        match self.jobs.latest(roi_id, &hash) {
            Some(job) if job.feature_key == key => match job.error.clone() {
                Some(e) => Err(ApiError::unprocessable("extraction-failed", e).with_details(json!({"job": job}))),
                None => Ok(FeatureLookup::Pending(job)),
            },
            _ => Err(ApiError::not_found(
                "no-features",
                format!("no extraction of roi `{roi_id}` with settings `{hash}` was requested"),
            )),
        }
    }

    pub fn link(&self, roi_id: &str, req: LinkRequest) -> ApiResult<Linked> {
        let mut ann = self.annotations.lock().unwrap();
        let current = ann.roi(roi_id).ok_or_else(|| ApiError::from(radiowb_core::Error::UnknownRoi(roi_id.into())))?;
        let group_id = req
            .group_id
            .or_else(|| current.lesion_group_id.clone())
            .unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
        let mut ids = vec![roi_id.to_string()];
        ids.extend(req.with.iter().filter(|id| id.as_str() != roi_id).cloned());
        ann.link_rois(&ids, &group_id)?;
        for (k, v) in &req.labels {
            ann.set_label(roi_id, k, v)?;
        }
        let rois: Vec<RoiPolygon> =
            ann.rois().filter(|r| r.lesion_group_id.as_deref() == Some(group_id.as_str())).cloned().collect();
        for r in &rois {
            self.stores.masks.put(r)?;
        }
        Ok(Linked { group_id, rois })
    }

    /// Seeded region growing inside the drawn curve; the grown mask comes
    /// back as traced polygons.
    pub fn region_grow(&self, req: RegionGrow) -> ApiResult<Grown> {
        let study_id = self
            .annotations
            .lock()
            .unwrap()
            .study_of_series(&req.series_id)
            .map(str::to_string)
            .ok_or_else(|| ApiError::from(radiowb_core::Error::UnknownSeries(req.series_id.clone())))?;
        let series = self.study_record(&study_id)?.series(&req.series_id).cloned().expect("series in study");
        let vol = self.stores.images.volume(&series.volume)?;
        let roi_id = req.roi_id.unwrap_or_else(|| "grown".into());
        let mut grow =
            GrowRequest::new(RoiPolygon::new(roi_id.clone(), req.series_id.clone(), req.slices), req.polarity);
        grow.spread_3d = req.spread_3d;
        if let Some(v) = req.max_voxels {
            grow.max_voxels = v;
        }
        if let Some(v) = req.seed_fraction {
            grow.seed_fraction = v;
        }
        if let Some(v) = req.threshold_sigmas {
            grow.threshold_sigmas = v;
        }
        grow.curve.validate()?;
        match rasterize_dims(&grow.curve, vol.dims()) {
            Err(radiowb_core::Error::EmptyMask) => {
                return Err(ApiError::unprocessable("empty-seeds", "the bounding curve encloses no voxel centers"))
            }
            other => other?,
        };
        let outcome = fit_boundary(&vol, &grow, &CancelToken::new())?;
        let roi = mask_to_roi(&outcome.mask, roi_id, req.series_id)?;
        Ok(Grown { roi, voxel_count: outcome.mask.voxel_count(), truncated: outcome.truncated })
    }

    /// Maps an ROI into another series of its study. The copy is returned
    /// for editing, not persisted.
    pub fn copy(&self, roi_id: &str, req: CopyRequest) -> ApiResult<RoiPolygon> {
        let ann = self.annotations.lock().unwrap();
        let roi = ann.roi(roi_id).ok_or_else(|| ApiError::from(radiowb_core::Error::UnknownRoi(roi_id.into())))?;
        let source = ann.series(&roi.series_id).expect("roi series registered");
        let target = ann
            .series(&req.target_series)
            .ok_or_else(|| ApiError::from(radiowb_core::Error::UnknownSeries(req.target_series.clone())))?;
        let mut out = copy_roi(roi, source, target)?;
        if let Some(id) = req.roi_id {
            check_id("roi", &id)?;
            out.roi_id = id;
        }
        Ok(out)
    }

    pub fn node_types(&self) -> Vec<NodeTypeInfo> {
        self.engine.registry().describe()
    }

    pub fn validate_graph(&self, spec: &GraphSpec) -> Validation {
        let diagnostics = validate(spec, self.engine.registry());
        Validation { valid: diagnostics.is_empty(), diagnostics }
    }

    /// Writes `features.csv`, `manifest.json`, volumes and ROI files for a
    /// study into `dir`.
    fn export_study(&self, sel: &DataSelection, study_id: &str, dir: &Path) -> ApiResult<()> {
        let study = self.study_record(study_id)?;
        let hash = sel.settings.clone().unwrap_or_else(|| ExtractionSettings::default().hash());
        let rois: Vec<RoiPolygon> = {
            let ann = self.annotations.lock().unwrap();
            study.rois.iter().filter_map(|id| ann.roi(id).cloned()).collect()
        };
        if rois.is_empty() {
            return Err(ApiError::unprocessable("empty-study", format!("study `{study_id}` has no rois")));
        }
        let io = ApiError::internal;
        for sub in ["volumes", "rois"] {
            std::fs::create_dir_all(dir.join(sub)).map_err(io)?;
        }
        let (mut vectors, mut pending, mut items, mut labels) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for roi in &rois {
            let series = study.series(&roi.series_id).expect("roi series in study");
            let label = match &sel.label {
                Some(name) => parse_label(roi.labels.get(name), sel.positive.as_deref())?,
                None => None,
            };
            let volume = format!("volumes/{}.dvol", series.series_id);
            if !dir.join(&volume).exists() {
                std::fs::write(dir.join(&volume), self.stores.images.volume_bytes(&series.volume)?).map_err(io)?;
            }
            let roi_file = format!("rois/{}.json", roi.roi_id);
            std::fs::write(dir.join(&roi_file), roi.to_json()).map_err(io)?;
            items.push(json!({"roi_id": roi.roi_id, "volume": volume, "roi": roi_file, "label": label}));
            labels.push(label);
            match self.stores.features.get(&feature_key(&roi.roi_id, &roi.slices, &series.volume, &hash))? {
                Some(v) => vectors.push(v),
                None => pending.push(roi.roi_id.clone()),
            }
        }
        let manifest = serde_json::to_vec_pretty(&json!({"items": items})).map_err(ApiError::internal)?;
        std::fs::write(dir.join("manifest.json"), manifest).map_err(io)?;
        if !pending.is_empty() {
            return Err(ApiError::conflict("features-pending", "some rois have no extracted features yet")
                .with_details(json!({"rois": pending, "settings": hash})));
        }
        let columns = vectors[0].names.clone();
        let table = FeatureTable::new(
            vectors.iter().map(|v| v.roi_id.clone()).collect(),
            columns,
            vectors.into_iter().map(|v| v.values).collect(),
        )
        .and_then(|t| t.with_labels(labels))
        .map_err(|e| ApiError::unprocessable("invalid-table", e.to_string()))?;
        std::fs::write(dir.join("features.csv"), table.to_csv()).map_err(io)
    }

    /// Validates synchronously, then executes on a background thread.
    pub fn start_run(&self, req: RunRequest) -> ApiResult<RunView> {
        let diagnostics = validate(&req.graph, self.engine.registry());
        if !diagnostics.is_empty() {
            return Err(radiowb_graph::Error::Invalid(diagnostics).into());
        }
        if req.parallelism == 0 {
            return Err(ApiError::unprocessable("invalid-parameter", "parallelism must be at least 1"));
        }
        let run_id = uuid::Uuid::new_v4().to_string();
        let data_dir = match (&req.data.dir, &req.data.study) {
            (Some(_), Some(_)) => return Err(ApiError::bad_request("choose either `dir` or `study`")),
            (Some(d), None) => resolve_under(&self.data_dir, d)?,
            (None, Some(study)) => {
                let dir = self.stores.run_dir(&run_id);
                self.export_study(&req.data, study, &dir)?;
                dir
            }
            (None, None) => self.data_dir.clone(),
        };
        let entry = self.runs.insert(RunEntry::new(run_id, req.graph.clone(), req.seed, req.parallelism, now_micros()));
        let view = entry.lock().unwrap().view.clone();
        let (engine, stores) = (self.engine.clone(), self.stores.clone());
        std::thread::spawn(move || {
            let ctx = RunContext::new(data_dir, req.seed);
            let observer = |id: &str, r: &radiowb_graph::NodeResult| entry.lock().unwrap().observe(id, r);
            let outcome = engine.execute_observed(&req.graph, &ctx, req.parallelism, &observer);
            let saved = outcome.map_err(|e| e.to_string()).and_then(|record| {
                let id =
                    if req.save { Some(stores.experiments.save(&record).map_err(|e| e.to_string())?) } else { None };
                Ok((record, id))
            });
            let mut e = entry.lock().unwrap();
            match saved {
                Ok((record, id)) => {
                    for (nid, r) in &record.nodes {
                        e.observe(nid, r);
                    }
                    e.view.record_id = id;
                    e.view.phase = RunPhase::Finished;
                }
                Err(msg) => {
                    e.view.error = Some(msg);
                    e.view.phase = RunPhase::Failed;
                }
            }
        });
        Ok(view)
    }

    pub fn run(&self, run_id: &str) -> ApiResult<RunView> {
        let entry =
            self.runs.get(run_id).ok_or_else(|| ApiError::not_found("unknown-run", format!("no run `{run_id}`")))?;
        let view = entry.lock().unwrap().view.clone();
        Ok(view)
    }

    /// Output of one node. Skipped and failed nodes report their status
    /// with no payload.
    pub fn node_output(&self, run_id: &str, node_id: &str) -> ApiResult<NodeOutput> {
        let entry =
            self.runs.get(run_id).ok_or_else(|| ApiError::not_found("unknown-run", format!("no run `{run_id}`")))?;
        let e = entry.lock().unwrap();
        if e.spec.node(node_id).is_none() {
            return Err(ApiError::not_found("unknown-node", format!("run `{run_id}` has no node `{node_id}`")));
        }
        let result = e.results.get(node_id);
        Ok(NodeOutput {
            run_id: run_id.to_string(),
            node_id: node_id.to_string(),
            status: result.map(|r| r.status).unwrap_or(Status::Pending),
            payload: result.and_then(|r| r.payload.clone()),
            error: result.and_then(|r| r.error.clone()),
        })
    }

    pub fn history(&self) -> ApiResult<Vec<ExperimentSummary>> {
        Ok(self.stores.experiments.history()?)
    }

    pub fn retest(&self, record_id: &str, req: RetestRequest) -> ApiResult<Retest> {
        let text = match (req.table, req.path) {
            (Some(t), None) => t,
            (None, Some(p)) => std::fs::read_to_string(resolve_under(&self.data_dir, &p)?)
                .map_err(|e| ApiError::not_found("unknown-file", format!("{p}: {e}")))?,
            _ => return Err(ApiError::bad_request("give exactly one of `table` or `path`")),
        };
        let table =
            FeatureTable::from_csv(&text).map_err(|e| ApiError::unprocessable("invalid-table", e.to_string()))?;
        Ok(self.stores.experiments.retest(record_id, &table, req.node.as_deref())?)
    }

    pub fn delete_experiment(&self, record_id: &str) -> ApiResult<Deleted> {
        let freed_models = self.stores.experiments.delete(record_id)?;
        Ok(Deleted { record_id: record_id.to_string(), freed_models })
    }

    pub fn slice(&self, study_id: &str, series_id: &str, z: usize) -> ApiResult<Slice> {
        let study = self.study_record(study_id)?;
        let series = study
            .series(series_id)
            .ok_or_else(|| ApiError::from(radiowb_core::Error::UnknownSeries(series_id.into())))?;
        let [nx, ny, nz] = series.dims;
        if z >= nz {
            return Err(radiowb_core::Error::SliceOutOfRange { index: z as i64, depth: nz }.into());
        }
        let vol = self.stores.images.volume(&series.volume)?;
        Ok(Slice { z, dims: [nx, ny], values: vol.voxels()[z * nx * ny..(z + 1) * nx * ny].to_vec() })
    }

    /// Stops the extraction workers after the queue drains.
    pub fn shutdown(&self) {
        self.jobs.shutdown();
    }
}
