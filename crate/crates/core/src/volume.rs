//! Dense voxel grids with physical geometry, and binary masks over them.
//!
//! Voxels are stored x-fastest: the linear index of `(x, y, z)` is
//! `x + nx * (y + ny * z)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A scalar volume with millimetre geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    voxels: Vec<f64>,
    modality: String,
}

impl Volume {
    pub fn new(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        voxels: Vec<f64>,
        modality: impl Into<String>,
    ) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidVolume(format!("dims must be positive, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidVolume(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidVolume(format!("origin must be finite, got {origin:?}")));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if voxels.len() != expected {
            return Err(Error::SizeMismatch { expected, actual: voxels.len() });
        }
        if let Some(i) = voxels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dims, spacing, origin, voxels, modality: modality.into() })
    }

    /// Unit-spacing volume at the origin; handy for synthetic data.
    pub fn from_voxels(dims: [usize; 3], voxels: Vec<f64>) -> Result<Self> {
        Self::new(dims, [1.0; 3], [0.0; 3], voxels, "OT")
    }

    /// Builds a volume by evaluating `f(x, y, z)` at every voxel.
    pub fn from_fn(dims: [usize; 3], spacing: [f64; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut voxels = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    voxels.push(f(x, y, z));
                }
            }
        }
        Self::new(dims, spacing, [0.0; 3], voxels, "OT")
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn modality(&self) -> &str {
        &self.modality
    }

    pub fn voxels(&self) -> &[f64] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.voxels[self.index(x, y, z)]
    }

    /// Physical volume of one voxel in mm³.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Same geometry, new values. Values must be finite.
    pub fn with_voxels(&self, voxels: Vec<f64>) -> Result<Self> {
        Self::new(self.dims, self.spacing, self.origin, voxels, self.modality.clone())
    }

    pub fn with_geometry(mut self, spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        self.spacing = spacing;
        self.origin = origin;
        Self::new(self.dims, self.spacing, self.origin, self.voxels, self.modality)
    }

    /// Minimum and maximum voxel value.
    pub fn value_range(&self) -> (f64, f64) {
        self.voxels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// A binary region over a volume grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mask {
    dims: [usize; 3],
    bits: Vec<bool>,
    voxel_count: usize,
}

impl Mask {
    pub fn empty(dims: [usize; 3]) -> Self {
        Self { dims, bits: vec![false; dims[0] * dims[1] * dims[2]], voxel_count: 0 }
    }

    pub fn full(dims: [usize; 3]) -> Self {
        let n = dims[0] * dims[1] * dims[2];
        Self { dims, bits: vec![true; n], voxel_count: n }
    }

    pub fn from_bits(dims: [usize; 3], bits: Vec<bool>) -> Result<Self> {
        let expected = dims[0] * dims[1] * dims[2];
        if bits.len() != expected {
            return Err(Error::SizeMismatch { expected, actual: bits.len() });
        }
        let voxel_count = bits.iter().filter(|&&b| b).count();
        Ok(Self { dims, bits, voxel_count })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    bits.push(f(x, y, z));
                }
            }
        }
        let voxel_count = bits.iter().filter(|&&b| b).count();
        Self { dims, bits, voxel_count }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn voxel_count(&self) -> usize {
        self.voxel_count
    }

    pub fn is_empty(&self) -> bool {
        self.voxel_count == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[self.index(x, y, z)]
    }

    /// Bounds-checked lookup with signed coordinates; outside the grid is `false`.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64, z: i64) -> bool {
        if x < 0 || y < 0 || z < 0 {
            return false;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return false;
        }
        self.get(x, y, z)
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        if self.bits[i] != value {
            self.bits[i] = value;
            if value {
                self.voxel_count += 1;
            } else {
                self.voxel_count -= 1;
            }
        }
    }

    /// Coordinates of all set voxels in storage order.
    pub fn coords(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let [nx, ny, _] = self.dims;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| [i % nx, (i / nx) % ny, i / (nx * ny)])
    }

    pub fn check_against(&self, vol: &Volume) -> Result<()> {
        if self.dims != vol.dims() {
            return Err(Error::DimsMismatch { mask: self.dims, volume: vol.dims() });
        }
        Ok(())
    }

    pub fn union(&self, other: &Mask) -> Mask {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Mask::from_bits(self.dims, bits).expect("same dims")
    }

    pub fn intersection(&self, other: &Mask) -> Mask {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect();
        Mask::from_bits(self.dims, bits).expect("same dims")
    }

    /// Voxels set in `self` but not in `other`.
    pub fn difference(&self, other: &Mask) -> Mask {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && !*b).collect();
        Mask::from_bits(self.dims, bits).expect("same dims")
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Sørensen–Dice overlap of two masks on the same grid.
    pub fn dice(&self, other: &Mask) -> f64 {
        let inter = self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count();
        let denom = self.voxel_count + other.voxel_count;
        if denom == 0 {
            1.0
        } else {
            2.0 * inter as f64 / denom as f64
        }
    }

    /// Sorted list of z indices holding at least one voxel.
    pub fn occupied_slices(&self) -> Vec<usize> {
        let plane = self.dims[0] * self.dims[1];
        (0..self.dims[2]).filter(|&z| self.bits[z * plane..(z + 1) * plane].iter().any(|&b| b)).collect()
    }
}
