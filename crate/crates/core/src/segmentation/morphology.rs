//! Box morphology, mask perturbation and perilesional rings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::contour::trace_slice;
use crate::roi::fill_polygon;
use crate::{Error, Mask, Result, SlicePolygon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbKind {
    Dilate,
    Erode,
    Translate,
    ContourNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbKind,
    /// Voxels.
    pub magnitude: u32,
    #[serde(default)]
    pub seed: u64,
}

impl Perturbation {
    pub fn new(kind: PerturbKind, magnitude: u32, seed: u64) -> Self {
        Self { kind, magnitude, seed }
    }
}

/// Runs a 1-D sliding window over every line along `axis`.
fn along_axis(mask: &Mask, axis: usize, radius: usize, dilate: bool) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let dims = mask.dims();
    let n = dims[axis];
    let stride = [1, dims[0], dims[0] * dims[1]][axis];
    let src = mask.bits();
    let mut out = vec![false; src.len()];
    let mut prefix = vec![0usize; n + 1];
    for start in 0..src.len() {
        let pos = (start / stride) % n;
        if pos != 0 {
            continue;
        }
        for i in 0..n {
            prefix[i + 1] = prefix[i] + src[start + i * stride] as usize;
        }
        for i in 0..n {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            let set = prefix[hi + 1] - prefix[lo];
            out[start + i * stride] = if dilate { set > 0 } else { set == hi + 1 - lo };
        }
    }
    Mask::from_bits(dims, out).expect("same dims")
}

/// 26-neighbourhood dilation iterated `radius[a]` times along each axis.
pub fn dilate(mask: &Mask, radius: [usize; 3]) -> Mask {
    (0..3).fold(mask.clone(), |m, a| along_axis(&m, a, radius[a], true))
}

/// 26-neighbourhood erosion. Neighbours outside the grid are ignored, so a
/// region touching the border is not eaten from that side.
pub fn erode(mask: &Mask, radius: [usize; 3]) -> Mask {
    (0..3).fold(mask.clone(), |m, a| along_axis(&m, a, radius[a], false))
}

/// Shifts by an integer offset; voxels leaving the grid are dropped.
pub fn translate(mask: &Mask, offset: [i64; 3]) -> Mask {
    let dims = mask.dims();
    let mut out = Mask::empty(dims);
    for [x, y, z] in mask.coords() {
        let p = [x as i64 + offset[0], y as i64 + offset[1], z as i64 + offset[2]];
        if (0..3).all(|a| p[a] >= 0 && (p[a] as usize) < dims[a]) {
            out.set(p[0] as usize, p[1] as usize, p[2] as usize, true);
        }
    }
    out
}

pub fn perturb_roi(mask: &Mask, p: &Perturbation) -> Result<Mask> {
    let m = p.magnitude as usize;
    if m == 0 && matches!(p.kind, PerturbKind::Dilate | PerturbKind::Erode) {
        return Err(Error::InvalidParameter("morphological perturbation needs magnitude >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let out = match p.kind {
        PerturbKind::Dilate => dilate(mask, [m; 3]),
        PerturbKind::Erode => erode(mask, [m; 3]),
        PerturbKind::Translate => {
            let r = m as i64;
            let offset = [rng.gen_range(-r..=r), rng.gen_range(-r..=r), rng.gen_range(-r..=r)];
            translate(mask, offset)
        }
        PerturbKind::ContourNoise => {
            let mut out = Mask::empty(mask.dims());
            let amp = p.magnitude as f64;
            for z in mask.occupied_slices() {
                for mut poly in trace_slice(mask, z) {
                    for v in &mut poly {
                        v[0] += rng.gen_range(-amp..=amp);
                        v[1] += rng.gen_range(-amp..=amp);
                    }
                    fill_polygon(&mut out, &SlicePolygon { z, vertices: poly });
                }
            }
            out
        }
    };
    if out.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(out)
}

/// Shell between two dilations of the lesion, in millimetres.
///
/// Each distance is converted per axis to `round(mm / spacing)` dilation
/// steps.
pub fn perilesional_ring(mask: &Mask, spacing: [f64; 3], inner_mm: f64, outer_mm: f64) -> Result<Mask> {
    if !(inner_mm >= 0.0 && outer_mm > inner_mm) {
        return Err(Error::InvalidParameter(format!("ring needs 0 <= inner < outer, got {inner_mm}..{outer_mm}")));
    }
    let steps = |mm: f64| spacing.map(|s| (mm / s).round() as usize);
    let outer = dilate(mask, steps(outer_mm));
    let inner = dilate(mask, steps(inner_mm));
    let ring = outer.difference(&inner);
    if ring.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(ring)
}
