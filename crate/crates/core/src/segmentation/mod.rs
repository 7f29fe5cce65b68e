//! Semi-automatic ROI tools.
//!
//! * [`fit_boundary`]: seeded region growing inside a user-drawn curve.
//! * [`copy_roi`]: rigid copy of a polygon ROI to another series of the
//!   same study.
//! * [`perturb_roi`] and [`robust_features`]: feature stability under small
//!   changes of the mask.
//! * [`perilesional_ring`]: the shell of tissue around a lesion.
//! * [`mask_to_roi`]: traces a mask back into polygons.

mod contour;
mod morphology;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use contour::{mask_to_roi, trace_slice};
pub use morphology::{dilate, erode, perilesional_ring, perturb_roi, translate, PerturbKind, Perturbation};

use crate::radiomics::{extract_from_mask, ExtractionSettings};
use crate::roi::rasterize;
use crate::{Error, Mask, Result, RoiPolygon, SeriesGeometry, SlicePolygon, Volume};

/// Cooperative cancellation flag shared between a caller and a long job.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Bright,
    Dark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowRequest {
    pub curve: RoiPolygon,
    pub polarity: Polarity,
    #[serde(default)]
    pub spread_3d: bool,
    #[serde(default = "default_max_voxels")]
    pub max_voxels: usize,
    /// Fraction of in-curve voxels used as seeds.
    #[serde(default = "default_seed_fraction")]
    pub seed_fraction: f64,
    /// Admission threshold in units of the in-curve standard deviation.
    #[serde(default = "default_threshold_sigmas")]
    pub threshold_sigmas: f64,
}

fn default_max_voxels() -> usize {
    10_000_000
}

fn default_seed_fraction() -> f64 {
    0.05
}

fn default_threshold_sigmas() -> f64 {
    1.5
}

impl GrowRequest {
    pub fn new(curve: RoiPolygon, polarity: Polarity) -> Self {
        Self {
            curve,
            polarity,
            spread_3d: false,
            max_voxels: default_max_voxels(),
            seed_fraction: default_seed_fraction(),
            threshold_sigmas: default_threshold_sigmas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowOutcome {
    pub mask: Mask,
    /// Growth stopped at `max_voxels` with admissible voxels left.
    pub truncated: bool,
}

/// Maps an f64 to an integer with the same ordering.
fn order_key(v: f64) -> i64 {
    let b = v.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

/// Seeded region growing.
///
/// Seeds are the brightest (or darkest) `seed_fraction` of the voxels inside
/// the curve. The boundary voxel whose intensity is closest to the running
/// region mean is admitted next, as long as it lies within
/// `threshold_sigmas` in-curve standard deviations of that mean. Growth is
/// 6-connected and stays inside the curve, or inside its 2-D footprint on
/// any slice when `spread_3d` is set.
pub fn fit_boundary(vol: &Volume, req: &GrowRequest, cancel: &CancelToken) -> Result<GrowOutcome> {
    if req.max_voxels == 0 {
        return Err(Error::InvalidParameter("max_voxels must be at least 1".into()));
    }
    if !(req.seed_fraction > 0.0 && req.seed_fraction <= 1.0) || !(req.threshold_sigmas >= 0.0) {
        return Err(Error::InvalidParameter("seed fraction must be in (0, 1] and threshold >= 0".into()));
    }
    let curve = rasterize(&req.curve, vol)?;
    let dims = vol.dims();
    let allowed = if req.spread_3d {
        let [nx, ny, nz] = dims;
        let mut foot = vec![false; nx * ny];
        for [x, y, _] in curve.coords() {
            foot[x + nx * y] = true;
        }
        Mask::from_fn([nx, ny, nz], |x, y, _| foot[x + nx * y])
    } else {
        curve.clone()
    };

    let idx: Vec<usize> = curve.coords().map(|[x, y, z]| vol.index(x, y, z)).collect();
    let values = vol.voxels();
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&i| values[i]).sum::<f64>() / n;
    let var = idx.iter().map(|&i| (values[i] - mean).powi(2)).sum::<f64>() / n;
    let threshold = req.threshold_sigmas * var.sqrt();

    let mut ranked = idx.clone();
    ranked.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        let ord = if req.polarity == Polarity::Bright { ord.reverse() } else { ord };
        ord.then(a.cmp(&b))
    });
    let n_seeds = ((req.seed_fraction * n).ceil() as usize).clamp(1, idx.len());
    if ranked.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let mut truncated = n_seeds > req.max_voxels;
    let seeds = &ranked[..n_seeds.min(req.max_voxels)];

    let mut region = vec![false; values.len()];
    let mut queued = vec![false; values.len()];
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut candidates: BTreeSet<(i64, usize)> = BTreeSet::new();
    let [nx, ny, nz] = dims;
    let push_neighbours = |i: usize, candidates: &mut BTreeSet<(i64, usize)>, queued: &mut [bool], region: &[bool]| {
        let (x, y, z) = (i % nx, (i / nx) % ny, i / (nx * ny));
        let mut visit = |j: usize| {
            if !region[j] && !queued[j] && allowed.bits()[j] {
                queued[j] = true;
                candidates.insert((order_key(values[j]), j));
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < nx {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - nx);
        }
        if y + 1 < ny {
            visit(i + nx);
        }
        if z > 0 {
            visit(i - nx * ny);
        }
        if z + 1 < nz {
            visit(i + nx * ny);
        }
    };
    for &s in seeds {
        region[s] = true;
        sum += values[s];
        count += 1;
    }
    for &s in seeds {
        if queued[s] {
            candidates.remove(&(order_key(values[s]), s));
        }
        push_neighbours(s, &mut candidates, &mut queued, &region);
    }
    candidates.retain(|&(_, j)| !region[j]);

    while !candidates.is_empty() {
        if cancel.is_cancelled() {
            return Err(Error::Cancelled);
        }
        let m = sum / count as f64;
        let k = order_key(m);
        let below = candidates.range(..(k, 0)).next_back().copied();
        let above = candidates.range((k, 0)..).next().copied();
        let dist = |c: Option<(i64, usize)>| c.map(|(_, j)| (values[j] - m).abs());
        let best = match (below, above) {
            (Some(b), Some(a)) => {
                if dist(Some(b)).unwrap() <= dist(Some(a)).unwrap() {
                    b
                } else {
                    a
                }
            }
            (Some(b), None) => b,
            (None, Some(a)) => a,
            (None, None) => unreachable!(),
        };
        if (values[best.1] - m).abs() > threshold {
            break;
        }
        if count >= req.max_voxels {
            truncated = true;
            break;
        }
        candidates.remove(&best);
        let j = best.1;
        region[j] = true;
        sum += values[j];
        count += 1;
        push_neighbours(j, &mut candidates, &mut queued, &region);
    }
    Ok(GrowOutcome { mask: Mask::from_bits(dims, region)?, truncated })
}

/// Rigidly maps an ROI into another series of the same study.
///
/// Vertices go voxel → patient through the source geometry and patient →
/// voxel through the target; each slice lands on the nearest target slice.
pub fn copy_roi(roi: &RoiPolygon, source: &SeriesGeometry, target: &SeriesGeometry) -> Result<RoiPolygon> {
    if source.study_id != target.study_id {
        return Err(Error::CrossStudy(vec![source.study_id.clone(), target.study_id.clone()]));
    }
    let mut slices = Vec::with_capacity(roi.slices.len());
    for s in &roi.slices {
        let mut z_target = 0.0;
        let vertices = s
            .vertices
            .iter()
            .map(|v| {
                let p = target.patient_to_voxel(source.voxel_to_patient([v[0], v[1], s.z as f64]));
                z_target = p[2];
                [p[0], p[1]]
            })
            .collect();
        let z = z_target.round();
        if z < 0.0 || z >= target.dims[2] as f64 {
            return Err(Error::SliceOutOfRange { index: z as i64, depth: target.dims[2] });
        }
        slices.push(SlicePolygon { z: z as usize, vertices });
    }
    let mut out = RoiPolygon::new(roi.roi_id.clone(), target.series_id.clone(), slices);
    out.labels = roi.labels.clone();
    out.validate()?;
    Ok(out)
}

/// Per-feature mean and coefficient of variation across perturbed masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustFeatures {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    /// `std / |mean|` (population std). Zero when every sample agrees.
    pub cv: Vec<f64>,
    pub samples: usize,
}

impl RobustFeatures {
    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        self.names.iter().position(|n| n == name).map(|i| (self.mean[i], self.cv[i]))
    }
}

/// Extracts features over the original mask and `n_perturb` perturbed
/// copies. Perturbation `i` uses seed `base.seed + i`.
pub fn robust_features(
    vol: &Volume,
    mask: &Mask,
    n_perturb: usize,
    base: &Perturbation,
    settings: &ExtractionSettings,
) -> Result<RobustFeatures> {
    let mut runs = vec![extract_from_mask(vol, mask, settings)?];
    for i in 0..n_perturb {
        let p = Perturbation { seed: base.seed.wrapping_add(i as u64), ..*base };
        runs.push(extract_from_mask(vol, &perturb_roi(mask, &p)?, settings)?);
    }
    let names = runs[0].names.clone();
    let k = runs.len() as f64;
    let mut mean = Vec::with_capacity(names.len());
    let mut cv = Vec::with_capacity(names.len());
    for f in 0..names.len() {
        let m = runs.iter().map(|r| r.values[f]).sum::<f64>() / k;
        let sd = (runs.iter().map(|r| (r.values[f] - m).powi(2)).sum::<f64>() / k).sqrt();
        mean.push(m);
        cv.push(if sd == 0.0 { 0.0 } else { sd / m.abs() });
    }
    Ok(RobustFeatures { names, mean, cv, samples: runs.len() })
}
