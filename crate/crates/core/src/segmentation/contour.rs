//! Mask slices back to polygons.
//!
//! Boundaries follow pixel edges, so every vertex sits on a half-integer
//! corner and no voxel center can fall on an edge. Where two foreground
//! pixels touch only at a corner the tracer turns left and keeps them apart,
//! then each corner is nudged a hair towards the interior so that a contour
//! passing the same corner twice stays simple.

use std::collections::HashMap;

use crate::{Error, Mask, Result, RoiPolygon, SlicePolygon};

const NUDGE: f64 = 1e-3;

type Corner = (i64, i64);

fn left(d: Corner) -> Corner {
    (-d.1, d.0)
}

/// Closed contours (outer boundaries and holes) of one slice.
pub fn trace_slice(mask: &Mask, z: usize) -> Vec<Vec<[f64; 2]>> {
    let [nx, ny, _] = mask.dims();
    let inside = |x: i64, y: i64| mask.get_signed(x, y, z as i64);
    // corner (i, j) is the point (i - 0.5, j - 0.5)
    let mut out: HashMap<Corner, Vec<Corner>> = HashMap::new();
    let mut order: Vec<(Corner, Corner)> = Vec::new();
    for y in 0..ny as i64 {
        for x in 0..nx as i64 {
            if !inside(x, y) {
                continue;
            }
            let sides = [
                ((x, y - 1), (x, y), (1, 0)),
                ((x + 1, y), (x + 1, y), (0, 1)),
                ((x, y + 1), (x + 1, y + 1), (-1, 0)),
                ((x - 1, y), (x, y + 1), (0, -1)),
            ];
            for (nb, from, dir) in sides {
                if !inside(nb.0, nb.1) {
                    out.entry(from).or_default().push(dir);
                    order.push((from, dir));
                }
            }
        }
    }

    let mut loops = Vec::new();
    for (start, start_dir) in order {
        let Some(dirs) = out.get_mut(&start) else { continue };
        let Some(k) = dirs.iter().position(|d| *d == start_dir) else { continue };
        dirs.swap_remove(k);
        let mut path: Vec<(Corner, Corner)> = vec![(start, start_dir)];
        let mut at = (start.0 + start_dir.0, start.1 + start_dir.1);
        let mut dir = start_dir;
        loop {
            let preference = [left(dir), dir, left(left(left(dir)))];
            let dirs = out.get_mut(&at).expect("boundary edges form closed loops");
            let pick = preference
                .iter()
                .find(|p| dirs.contains(p) || (at == start && **p == start_dir))
                .copied()
                .expect("boundary edges form closed loops");
            if at == start && pick == start_dir {
                break;
            }
            let k = dirs.iter().position(|d| *d == pick).expect("present");
            dirs.swap_remove(k);
            path.push((at, pick));
            dir = pick;
            at = (at.0 + dir.0, at.1 + dir.1);
        }
        loops.push(to_vertices(&path));
    }
    loops
}

fn to_vertices(path: &[(Corner, Corner)]) -> Vec<[f64; 2]> {
    let n = path.len();
    let mut v = Vec::new();
    for i in 0..n {
        let (corner, d_out) = path[i];
        let d_in = path[(i + n - 1) % n].1;
        if d_in == d_out {
            continue;
        }
        let (a, b) = (left(d_in), left(d_out));
        v.push([
            corner.0 as f64 - 0.5 + NUDGE * (a.0 + b.0) as f64,
            corner.1 as f64 - 0.5 + NUDGE * (a.1 + b.1) as f64,
        ]);
    }
    v
}

/// Polygon ROI whose rasterization reproduces `mask` exactly.
pub fn mask_to_roi(mask: &Mask, roi_id: impl Into<String>, series_id: impl Into<String>) -> Result<RoiPolygon> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let slices = mask
        .occupied_slices()
        .into_iter()
        .flat_map(|z| trace_slice(mask, z).into_iter().map(move |vertices| SlicePolygon { z, vertices }))
        .collect();
    Ok(RoiPolygon::new(roi_id, series_id, slices))
}
