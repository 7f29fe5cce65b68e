//! Polygon regions of interest and their rasterization onto a voxel grid.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Mask, Result, Volume};

/// One closed polygon on an axial slice, in voxel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePolygon {
    pub z: usize,
    pub vertices: Vec<[f64; 2]>,
}

/// A (possibly multi-slice) ROI stored as the vertices of its slice polygons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiPolygon {
    pub roi_id: String,
    pub series_id: String,
    pub slices: Vec<SlicePolygon>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default)]
    pub lesion_group_id: Option<String>,
}

impl RoiPolygon {
    pub fn new(roi_id: impl Into<String>, series_id: impl Into<String>, slices: Vec<SlicePolygon>) -> Self {
        Self {
            roi_id: roi_id.into(),
            series_id: series_id.into(),
            slices,
            labels: BTreeMap::new(),
            lesion_group_id: None,
        }
    }

    /// Single-slice convenience constructor.
    pub fn on_slice(
        roi_id: impl Into<String>,
        series_id: impl Into<String>,
        z: usize,
        vertices: Vec<[f64; 2]>,
    ) -> Self {
        Self::new(roi_id, series_id, vec![SlicePolygon { z, vertices }])
    }

    /// Checks vertex count, finiteness and simplicity of every slice polygon.
    pub fn validate(&self) -> Result<()> {
        if self.slices.is_empty() {
            return Err(Error::InvalidPolygon { slice: 0, reason: "roi has no slices".into() });
        }
        for s in &self.slices {
            validate_polygon(s)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let roi: RoiPolygon = serde_json::from_str(text)?;
        roi.validate()?;
        Ok(roi)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("roi serializes")
    }
}

fn validate_polygon(s: &SlicePolygon) -> Result<()> {
    let bad = |reason: &str| Error::InvalidPolygon { slice: s.z, reason: reason.to_string() };
    let v = &s.vertices;
    if v.len() < 3 {
        return Err(bad("fewer than 3 vertices"));
    }
    if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(bad("non-finite vertex"));
    }
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a == b {
            return Err(bad("repeated consecutive vertex"));
        }
        for j in i + 1..n {
            // adjacent edges share an endpoint by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(bad("polygon is self-intersecting"));
            }
        }
    }
    Ok(())
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Even-odd (crossing number) test. Edges are treated half-open in y so a
/// point on a shared vertex is counted exactly once.
pub fn point_in_polygon(p: [f64; 2], vertices: &[[f64; 2]]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (vi, vj) = (vertices[i], vertices[j]);
        if (vi[1] > p[1]) != (vj[1] > p[1]) {
            let x_cross = vj[0] + (p[1] - vj[1]) * (vi[0] - vj[0]) / (vi[1] - vj[1]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Marks every voxel whose center lies inside its slice polygon.
///
/// Voxel `(x, y)` has its center at coordinate `(x, y)`. Several polygons on
/// the same slice combine by parity, so a polygon nested inside another cuts
/// a hole.
pub fn rasterize(roi: &RoiPolygon, vol: &Volume) -> Result<Mask> {
    rasterize_dims(roi, vol.dims())
}

pub fn rasterize_dims(roi: &RoiPolygon, dims: [usize; 3]) -> Result<Mask> {
    roi.validate()?;
    let mut mask = Mask::empty(dims);
    for s in &roi.slices {
        if s.z >= dims[2] {
            return Err(Error::SliceOutOfRange { index: s.z as i64, depth: dims[2] });
        }
        fill_polygon(&mut mask, s);
    }
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(mask)
}

pub(crate) fn fill_polygon(mask: &mut Mask, s: &SlicePolygon) {
    let [nx, ny, _] = mask.dims();
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in &s.vertices {
        lo_x = lo_x.min(v[0]);
        hi_x = hi_x.max(v[0]);
        lo_y = lo_y.min(v[1]);
        hi_y = hi_y.max(v[1]);
    }
    let clamp = |v: f64, n: usize| -> usize { v.max(0.0).min((n - 1) as f64) as usize };
    if hi_x < 0.0 || hi_y < 0.0 {
        return;
    }
    let (x0, x1) = (clamp(lo_x.floor(), nx), clamp(hi_x.ceil(), nx));
    let (y0, y1) = (clamp(lo_y.floor(), ny), clamp(hi_y.ceil(), ny));
    for y in y0..=y1 {
        for x in x0..=x1 {
            if point_in_polygon([x as f64, y as f64], &s.vertices) {
                let v = mask.get(x, y, s.z);
                mask.set(x, y, s.z, !v);
            }
        }
    }
}
