//! The four file-backed stores: images, masks, features and models.
//!
//! Each store is a plain directory of files written atomically, so a process
//! restart sees exactly what was last persisted. Volumes, feature vectors and
//! models are content-addressed; study records and masks are keyed by id.

use std::fs;
use std::io::{BufReader, Cursor};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use radiowb_core::dvol::{self, ValueType};
use radiowb_core::{FeatureVector, RoiPolygon, SlicePolygon, Volume};
use radiowb_graph::ExperimentStore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ApiError, ApiResult};

/// Ids used as file names: ASCII letters, digits, `-`, `_` and `.`, not
/// starting with a dot.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

pub fn check_id(kind: &str, id: &str) -> ApiResult<()> {
    if valid_id(id) {
        Ok(())
    } else {
        Err(ApiError::unprocessable("invalid-id", format!("`{id}` is not a valid {kind} id")))
    }
}

pub fn now_micros() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_micros() as u64).unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", uuid::Uuid::new_v4().simple()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> ApiResult<Option<T>> {
    match fs::read(path) {
        Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes).map_err(ApiError::internal)?)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(ApiError::internal(e)),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> ApiResult<()> {
    let bytes = serde_json::to_vec_pretty(value).map_err(ApiError::internal)?;
    write_atomic(path, &bytes).map_err(ApiError::internal)
}

fn list_json<T: for<'de> Deserialize<'de>>(dir: &Path) -> ApiResult<Vec<T>> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(ApiError::internal)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    names.iter().filter_map(|p| read_json(p).transpose()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub series_id: String,
    pub modality: String,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    /// Image-store digest of the volume.
    pub volume: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub study_id: String,
    /// Microseconds since the Unix epoch.
    pub created_at: u64,
    pub updated_at: u64,
    pub series: Vec<SeriesRecord>,
    pub rois: Vec<String>,
}

impl StudyRecord {
    pub fn series(&self, id: &str) -> Option<&SeriesRecord> {
        self.series.iter().find(|s| s.series_id == id)
    }
}

/// Volumes (content-addressed DVOL files) and study records.
#[derive(Debug, Clone)]
pub struct ImageStore {
    root: PathBuf,
}

impl ImageStore {
    fn volume_path(&self, digest: &str) -> PathBuf {
        self.root.join("volumes").join(format!("{digest}.dvol"))
    }

    fn study_path(&self, id: &str) -> PathBuf {
        self.root.join("studies").join(format!("{id}.json"))
    }

    pub fn put_volume(&self, vol: &Volume) -> ApiResult<String> {
        let bytes = dvol::encode(vol, ValueType::narrowest_for(vol.voxels()));
        let digest = sha256_hex(&bytes);
        let path = self.volume_path(&digest);
        if !path.exists() {
            write_atomic(&path, &bytes).map_err(ApiError::internal)?;
        }
        Ok(digest)
    }

    pub fn volume_bytes(&self, digest: &str) -> ApiResult<Vec<u8>> {
        if !valid_id(digest) {
            return Err(ApiError::not_found("unknown-volume", format!("no volume `{digest}`")));
        }
        fs::read(self.volume_path(digest))
            .map_err(|_| ApiError::not_found("unknown-volume", format!("no volume `{digest}`")))
    }

    pub fn volume(&self, digest: &str) -> ApiResult<Volume> {
        let bytes = self.volume_bytes(digest)?;
        dvol::decode(BufReader::new(Cursor::new(bytes))).map_err(ApiError::internal)
    }

    pub fn put_study(&self, study: &StudyRecord) -> ApiResult<()> {
        write_json(&self.study_path(&study.study_id), study)
    }

    pub fn study(&self, id: &str) -> ApiResult<Option<StudyRecord>> {
        if !valid_id(id) {
            return Ok(None);
        }
        read_json(&self.study_path(id))
    }

    pub fn studies(&self) -> ApiResult<Vec<StudyRecord>> {
        list_json(&self.root.join("studies"))
    }
}

/// ROI polygons keyed by roi id.
#[derive(Debug, Clone)]
pub struct MaskStore {
    root: PathBuf,
}

impl MaskStore {
    fn path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.json"))
    }

    pub fn put(&self, roi: &RoiPolygon) -> ApiResult<()> {
        write_json(&self.path(&roi.roi_id), roi)
    }

    pub fn get(&self, id: &str) -> ApiResult<Option<RoiPolygon>> {
        if !valid_id(id) {
            return Ok(None);
        }
        read_json(&self.path(id))
    }

    pub fn all(&self) -> ApiResult<Vec<RoiPolygon>> {
        list_json(&self.root)
    }
}

/// Feature vectors addressed by (roi, geometry, volume, settings).
#[derive(Debug, Clone)]
pub struct FeatureStore {
    root: PathBuf,
}

/// Content key of one extraction: the roi id, its slice polygons, the
/// volume digest and the settings hash. Labels do not participate.
pub fn feature_key(roi_id: &str, slices: &[SlicePolygon], volume: &str, settings_hash: &str) -> String {
    let geometry = serde_json::to_string(slices).expect("slices serialize");
    let mut h = Sha256::new();
    for part in [roi_id, &geometry, volume, settings_hash] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

impl FeatureStore {
    fn path(&self, key: &str) -> PathBuf {
        self.root.join(format!("{key}.json"))
    }

    pub fn put(&self, key: &str, v: &FeatureVector) -> ApiResult<()> {
        write_json(&self.path(key), v)
    }

    pub fn get(&self, key: &str) -> ApiResult<Option<FeatureVector>> {
        read_json(&self.path(key))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.path(key).exists()
    }
}

/// All stores under one root directory.
#[derive(Debug, Clone)]
pub struct Stores {
    root: PathBuf,
    pub images: ImageStore,
    pub masks: MaskStore,
    pub features: FeatureStore,
    /// Experiment records and the content-addressed model store.
    pub experiments: ExperimentStore,
}

impl Stores {
    pub fn open(root: impl Into<PathBuf>) -> ApiResult<Self> {
        let root = root.into();
        for dir in ["images/volumes", "images/studies", "masks", "features", "runs"] {
            fs::create_dir_all(root.join(dir)).map_err(ApiError::internal)?;
        }
        Ok(Self {
            images: ImageStore { root: root.join("images") },
            masks: MaskStore { root: root.join("masks") },
            features: FeatureStore { root: root.join("features") },
            experiments: ExperimentStore::open(&root)?,
            root,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Scratch directory for one run's materialized data.
    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.root.join("runs").join(run_id)
    }
}
