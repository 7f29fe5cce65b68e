//! Gray-level quantization of the in-mask intensities.

use serde::{Deserialize, Serialize};

use crate::{Error, Mask, Result, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinScheme {
    /// `Ng` equally wide bins spanning the in-mask range.
    FixedBinCount(usize),
    /// Bins of width `W` starting at the in-mask minimum.
    FixedBinWidth(f64),
}

impl Default for BinScheme {
    fn default() -> Self {
        BinScheme::FixedBinCount(32)
    }
}

/// Levels `1..=ng` inside the mask, `0` outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedVolume {
    dims: [usize; 3],
    levels: Vec<u32>,
    ng: usize,
    bin_edges: Vec<f64>,
    scheme: BinScheme,
}

impl DiscretizedVolume {
    /// Builds a discretized volume directly from levels (0 = outside mask).
    ///
    /// Useful for texture tests that start from known gray levels.
    pub fn from_levels(dims: [usize; 3], levels: Vec<u32>, ng: usize) -> Result<Self> {
        if levels.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::SizeMismatch { expected: dims[0] * dims[1] * dims[2], actual: levels.len() });
        }
        if ng < 1 || levels.iter().any(|&l| l as usize > ng) {
            return Err(Error::InvalidParameter(format!("levels must lie in 0..={ng}")));
        }
        let bin_edges = (0..=ng).map(|k| k as f64 + 0.5).collect();
        Ok(Self { dims, levels, ng, bin_edges, scheme: BinScheme::FixedBinCount(ng) })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn ng(&self) -> usize {
        self.ng
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn scheme(&self) -> BinScheme {
        self.scheme
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    /// Level at signed coordinates; `0` outside the grid or the mask.
    #[inline]
    pub fn level_signed(&self, x: i64, y: i64, z: i64) -> u32 {
        if x < 0 || y < 0 || z < 0 {
            return 0;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return 0;
        }
        self.levels[self.index(x, y, z)]
    }

    pub fn voxel_count(&self) -> usize {
        self.levels.iter().filter(|&&l| l > 0).count()
    }
}

/// Quantizes the in-mask voxels of `vol`.
///
/// Fixed bin count: `level = 1 + floor(Ng (x - min) / (max - min))`, clamped
/// to `Ng`; a constant region collapses to a single level. Fixed bin width:
/// `level = 1 + floor((x - min) / W)`.
pub fn discretize(vol: &Volume, mask: &Mask, scheme: BinScheme) -> Result<DiscretizedVolume> {
    mask.check_against(vol)?;
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (lo, hi) = vol
        .voxels()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &m)| m)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| (lo.min(v), hi.max(v)));

    let (to_level, ng, bin_edges): (Box<dyn Fn(f64) -> u32>, usize, Vec<f64>) = match scheme {
        BinScheme::FixedBinCount(ng) => {
            if ng < 1 {
                return Err(Error::InvalidParameter("bin count must be at least 1".into()));
            }
            let range = hi - lo;
            if range <= 0.0 {
                (Box::new(|_| 1), 1, vec![lo - 0.5, lo + 0.5])
            } else {
                let edges = (0..=ng).map(|k| lo + range * k as f64 / ng as f64).collect();
                let f = move |x: f64| -> u32 {
                    let l = 1 + ((ng as f64) * (x - lo) / range).floor() as i64;
                    l.clamp(1, ng as i64) as u32
                };
                (Box::new(f), ng, edges)
            }
        }
        BinScheme::FixedBinWidth(w) => {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("bin width must be positive, got {w}")));
            }
            let ng = 1 + ((hi - lo) / w).floor() as usize;
            let edges = (0..=ng).map(|k| lo + w * k as f64).collect();
            let f = move |x: f64| -> u32 { (1 + ((x - lo) / w).floor() as i64).clamp(1, ng as i64) as u32 };
            (Box::new(f), ng, edges)
        }
    };
    let levels = vol.voxels().iter().zip(mask.bits()).map(|(&v, &m)| if m { to_level(v) } else { 0 }).collect();
    let scheme = match scheme {
        BinScheme::FixedBinCount(_) => BinScheme::FixedBinCount(ng),
        s => s,
    };
    Ok(DiscretizedVolume { dims: vol.dims(), levels, ng, bin_edges, scheme })
}
