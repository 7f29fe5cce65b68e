//! Marching-cubes surface of a binary mask at iso-level 0.5.
//!
//! The mask is implicitly zero-padded by one voxel so the surface is closed.
//! Corner samples sit at voxel centers; with 0/1 samples every crossing lies
//! at an edge midpoint.

use super::mc_tables::{CORNERS, EDGES, TRIANGLES};
use crate::Mask;

#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub triangles: Vec<[[f64; 3]; 3]>,
}

impl TriangleMesh {
    /// Enclosed volume by summing signed tetrahedra against the origin.
    pub fn volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|[a, b, c]| {
                a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0])
            })
            .sum::<f64>()
            .abs()
            / 6.0
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|[a, b, c]| {
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let cr = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
                0.5 * (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt()
            })
            .sum()
    }
}

/// Triangulates the mask surface in physical (mm) coordinates relative to the
/// grid origin.
pub fn marching_cubes(mask: &Mask, spacing: [f64; 3]) -> TriangleMesh {
    let occ: Vec<[usize; 3]> = mask.coords().collect();
    if occ.is_empty() {
        return TriangleMesh::default();
    }
    // bounding box of the region, padded by one cell on each side
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for c in &occ {
        for a in 0..3 {
            lo[a] = lo[a].min(c[a] as i64);
            hi[a] = hi[a].max(c[a] as i64);
        }
    }
    let mut mesh = TriangleMesh::default();
    for z in lo[2] - 1..=hi[2] {
        for y in lo[1] - 1..=hi[1] {
            for x in lo[0] - 1..=hi[0] {
                let mut case = 0usize;
                for (i, c) in CORNERS.iter().enumerate() {
                    if !mask.get_signed(x + c[0] as i64, y + c[1] as i64, z + c[2] as i64) {
                        case |= 1 << i;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &TRIANGLES[case];
                for t in row.chunks(3).take_while(|t| t[0] >= 0) {
                    let tri = [0, 1, 2].map(|k| {
                        let [a, b] = EDGES[t[k] as usize];
                        let (ca, cb) = (CORNERS[a], CORNERS[b]);
                        [
                            (x as f64 + (ca[0] + cb[0]) as f64 / 2.0) * spacing[0],
                            (y as f64 + (ca[1] + cb[1]) as f64 / 2.0) * spacing[1],
                            (z as f64 + (ca[2] + cb[2]) as f64 / 2.0) * spacing[2],
                        ]
                    });
                    mesh.triangles.push(tri);
                }
            }
        }
    }
    mesh
}
