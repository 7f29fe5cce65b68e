//! Derived images: undecimated Haar wavelet bands, Laplacian of Gaussian and
//! the pointwise intensity transforms.
//!
//! Every derived image keeps the dims, spacing and origin of its source, so a
//! mask drawn on the original applies unchanged.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Volume};

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Which derived image a volume (and its feature block) comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ImageType {
    Original,
    /// Bit 2 = x, bit 1 = y, bit 0 = z; a set bit means high-pass on that axis.
    Wavelet(u8),
    Square,
    SquareRoot,
    Logarithm,
    Exponential,
    LoG(f64),
}

impl ImageType {
    /// The 13 image types of the default extraction, in column order.
    pub fn default_set() -> Vec<ImageType> {
        let mut v = vec![ImageType::Original];
        v.extend((0..8u8).map(ImageType::Wavelet));
        v.extend([ImageType::Square, ImageType::SquareRoot, ImageType::Logarithm, ImageType::Exponential]);
        v
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ImageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageType::Original => write!(f, "original"),
            ImageType::Wavelet(b) => {
                let c = |bit: u8| if b & bit != 0 { 'H' } else { 'L' };
                write!(f, "wavelet-{}{}{}", c(4), c(2), c(1))
            }
            ImageType::Square => write!(f, "square"),
            ImageType::SquareRoot => write!(f, "squareroot"),
            ImageType::Logarithm => write!(f, "logarithm"),
            ImageType::Exponential => write!(f, "exponential"),
            ImageType::LoG(s) => write!(f, "log-sigma-{s:.1}mm"),
        }
    }
}

/// Ordered collection of named derived volumes.
#[derive(Debug, Clone)]
pub struct DerivedImageSet {
    pub entries: Vec<(ImageType, Volume)>,
}

impl DerivedImageSet {
    /// Computes the requested image types (in the given order).
    pub fn compute(vol: &Volume, types: &[ImageType], parallel: bool) -> Result<Self> {
        let needs_wavelet = types.iter().any(|t| matches!(t, ImageType::Wavelet(_)));
        let bands = if needs_wavelet { Some(wavelet_decompose(vol)?) } else { None };
        let needs_intensity = types.iter().any(|t| {
            matches!(t, ImageType::Square | ImageType::SquareRoot | ImageType::Logarithm | ImageType::Exponential)
        });
        let transforms = if needs_intensity { Some(intensity_transforms(vol)) } else { None };

        let build = |t: &ImageType| -> Result<(ImageType, Volume)> {
            let v = match *t {
                ImageType::Original => vol.clone(),
                ImageType::Wavelet(b) => bands.as_ref().expect("bands computed")[b as usize].clone(),
                ImageType::Square => transforms.as_ref().expect("computed").square.clone(),
                ImageType::SquareRoot => transforms.as_ref().expect("computed").squareroot.clone(),
                ImageType::Logarithm => transforms.as_ref().expect("computed").logarithm.clone(),
                ImageType::Exponential => transforms.as_ref().expect("computed").exponential.clone(),
                ImageType::LoG(sigma) => log_filter(vol, sigma)?,
            };
            Ok((*t, v))
        };
        let entries = if parallel {
            types.par_iter().map(build).collect::<Result<Vec<_>>>()?
        } else {
            types.iter().map(build).collect::<Result<Vec<_>>>()?
        };
        Ok(Self { entries })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(t, _)| t.name()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Applies a two-tap filter along one axis with half-sample symmetric
/// extension at the upper end (`x[n] = x[n-1]`).
fn filter_axis(data: &[f64], dims: [usize; 3], axis: usize, high: bool) -> Vec<f64> {
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let n = dims[axis];
    let mut out = vec![0.0; data.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let pos = (i / stride) % n;
        let a = data[i];
        let b = if pos + 1 < n { data[i + stride] } else { a };
        *o = if high { (b - a) * INV_SQRT2 } else { (a + b) * INV_SQRT2 };
    }
    out
}

/// Single-level undecimated 3-D Haar decomposition.
///
/// Returns the eight bands indexed like [`ImageType::Wavelet`]: index 0 is
/// LLL, index 7 is HHH.
pub fn wavelet_decompose(vol: &Volume) -> Result<Vec<Volume>> {
    let dims = vol.dims();
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidParameter(format!("wavelet decomposition needs every axis ≥ 2, got {dims:?}")));
    }
    let mut bands = Vec::with_capacity(8);
    for x_pass in [false, true] {
        let sx = filter_axis(vol.voxels(), dims, 0, x_pass);
        for y_pass in [false, true] {
            let sy = filter_axis(&sx, dims, 1, y_pass);
            for z_pass in [false, true] {
                bands.push(vol.with_voxels(filter_axis(&sy, dims, 2, z_pass))?);
            }
        }
    }
    Ok(bands)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn convolve_axis(data: &[f64], dims: [usize; 3], axis: usize, kernel: &[f64]) -> Vec<f64> {
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let n = dims[axis] as i64;
    let r = (kernel.len() / 2) as i64;
    let mut out = vec![0.0; data.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let pos = ((i / stride) % n as usize) as i64;
        let base = i as i64 - pos * stride as i64;
        let mut acc = 0.0;
        for (k, w) in kernel.iter().enumerate() {
            let p = (pos + k as i64 - r).clamp(0, n - 1);
            acc += w * data[(base + p * stride as i64) as usize];
        }
        *o = acc;
    }
    out
}

/// Laplacian of Gaussian at scale `sigma_mm`.
///
/// Separable Gaussian blur with per-axis sigma in voxels (truncated at 4σ,
/// normalized), replicate boundary, then the 6-neighbour discrete Laplacian
/// in physical units.
pub fn log_filter(vol: &Volume, sigma_mm: f64) -> Result<Volume> {
    let spacing = vol.spacing();
    let min_spacing = spacing.iter().copied().fold(f64::INFINITY, f64::min);
    if !(sigma_mm > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma_mm}")));
    }
    if sigma_mm < 0.25 * min_spacing {
        return Err(Error::InvalidParameter(format!(
            "sigma {sigma_mm} mm is below a quarter voxel ({min_spacing} mm spacing)"
        )));
    }
    let dims = vol.dims();
    let mut data = vol.voxels().to_vec();
    for axis in 0..3 {
        data = convolve_axis(&data, dims, axis, &gaussian_kernel(sigma_mm / spacing[axis]));
    }
    let mut out = vec![0.0; data.len()];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let c = [x, y, z];
                let i = vol.index(x, y, z);
                let mut acc = 0.0;
                for axis in 0..3 {
                    let stride = [1, dims[0], dims[0] * dims[1]][axis];
                    let lo = if c[axis] > 0 { data[i - stride] } else { data[i] };
                    let hi = if c[axis] + 1 < dims[axis] { data[i + stride] } else { data[i] };
                    acc += (lo - 2.0 * data[i] + hi) / (spacing[axis] * spacing[axis]);
                }
                out[i] = acc;
            }
        }
    }
    vol.with_voxels(out)
}

#[derive(Debug, Clone)]
pub struct IntensityTransforms {
    pub square: Volume,
    pub squareroot: Volume,
    pub logarithm: Volume,
    pub exponential: Volume,
}

/// The four pointwise transforms, each rescaled back to the input range.
///
/// With `u = (x - min) / (max - min)`: square maps `u²`, squareroot maps
/// `√u`, logarithm maps `ln(1 + (x - min)) / ln(1 + range)` and exponential
/// maps `(eᵘ - 1) / (e - 1)`, each onto `[min, max]`. A constant input is
/// returned unchanged by all four.
pub fn intensity_transforms(vol: &Volume) -> IntensityTransforms {
    let (lo, hi) = vol.value_range();
    let range = hi - lo;
    let map = |f: &dyn Fn(f64) -> f64| -> Volume {
        if range <= 0.0 {
            return vol.clone();
        }
        let voxels = vol.voxels().iter().map(|&x| lo + range * f(x).clamp(0.0, 1.0)).collect();
        vol.with_voxels(voxels).expect("finite by construction")
    };
    let unit = |x: f64| (x - lo) / range;
    IntensityTransforms {
        square: map(&|x| unit(x).powi(2)),
        squareroot: map(&|x| {
            let u = unit(x);
            u.signum() * u.abs().sqrt()
        }),
        logarithm: map(&|x| (1.0 + (x - lo).abs()).ln() / (1.0 + range).ln()),
        exponential: map(&|x| (unit(x).exp() - 1.0) / (std::f64::consts::E - 1.0)),
    }
}
