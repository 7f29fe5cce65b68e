//! 3-D shape descriptors of the mask.

use std::collections::{BTreeMap, HashMap};

use nalgebra::Matrix3;

use super::mesh::marching_cubes;
use super::FeatureBlock;
use crate::Mask;

pub const FEATURE_NAMES: [&str; 14] = [
    "Elongation",
    "Flatness",
    "LeastAxisLength",
    "MajorAxisLength",
    "Maximum2DDiameterColumn",
    "Maximum2DDiameterRow",
    "Maximum2DDiameterSlice",
    "Maximum3DDiameter",
    "MeshVolume",
    "MinorAxisLength",
    "Sphericity",
    "SurfaceArea",
    "SurfaceVolumeRatio",
    "VoxelVolume",
];

/// In-mask voxels with at least one face neighbour outside the mask.
pub fn surface_voxels(mask: &Mask) -> Vec<[usize; 3]> {
    const FACES: [[i64; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    mask.coords()
        .filter(|c| FACES.iter().any(|d| !mask.get_signed(c[0] as i64 + d[0], c[1] as i64 + d[1], c[2] as i64 + d[2])))
        .collect()
}

fn max_pairwise(points: &[[f64; 3]]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2));
        }
    }
    best.sqrt()
}

/// Indices of points that are the first or last of their axis-aligned line
/// along every axis in `axes`. Squared distance is strictly convex along a
/// line, so a point strictly inside a line never ends a longest chord.
fn line_extremes(keys: &[[usize; 3]], axes: &[usize]) -> Vec<usize> {
    let mut keep = vec![true; keys.len()];
    for &a in axes {
        let line = |k: &[usize; 3]| match a {
            0 => [k[1], k[2]],
            1 => [k[0], k[2]],
            _ => [k[0], k[1]],
        };
        let mut ends: HashMap<[usize; 2], (usize, usize)> = HashMap::new();
        for k in keys {
            let e = ends.entry(line(k)).or_insert((k[a], k[a]));
            e.0 = e.0.min(k[a]);
            e.1 = e.1.max(k[a]);
        }
        for (i, k) in keys.iter().enumerate() {
            let (lo, hi) = ends[&line(k)];
            if k[a] != lo && k[a] != hi {
                keep[i] = false;
            }
        }
    }
    (0..keys.len()).filter(|&i| keep[i]).collect()
}

/// Largest pairwise distance, optionally restricted to pairs sharing the
/// coordinate on `same_axis`.
fn max_distance(points: &[[f64; 3]], keys: &[[usize; 3]], same_axis: Option<usize>) -> f64 {
    let axes: Vec<usize> = (0..3).filter(|&b| Some(b) != same_axis).collect();
    let kept = line_extremes(keys, &axes);
    let Some(a) = same_axis else {
        return max_pairwise(&kept.iter().map(|&i| points[i]).collect::<Vec<_>>());
    };
    let mut groups: BTreeMap<usize, Vec<[f64; 3]>> = BTreeMap::new();
    for i in kept {
        groups.entry(keys[i][a]).or_default().push(points[i]);
    }
    groups.values().map(|g| max_pairwise(g)).fold(0.0, f64::max)
}

/// Eigenvalues (descending) of the population covariance of physical
/// voxel-center coordinates.
pub fn principal_moments(mask: &Mask, spacing: [f64; 3]) -> [f64; 3] {
    let pts: Vec<[f64; 3]> = mask.coords().map(|c| [0, 1, 2].map(|a| c[a] as f64 * spacing[a])).collect();
    let n = pts.len() as f64;
    let mean = [0, 1, 2].map(|a| pts.iter().map(|p| p[a]).sum::<f64>() / n);
    let mut cov = Matrix3::<f64>::zeros();
    for p in &pts {
        for r in 0..3 {
            for c in 0..3 {
                cov[(r, c)] += (p[r] - mean[r]) * (p[c] - mean[c]) / n;
            }
        }
    }
    let mut ev: Vec<f64> = cov.symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    [ev[0], ev[1], ev[2]]
}

pub fn compute_shape(mask: &Mask, spacing: [f64; 3]) -> FeatureBlock {
    let mut warnings = Vec::new();
    if mask.is_empty() {
        return FeatureBlock::new("shape", &FEATURE_NAMES, vec![0.0; 14], vec!["shape: empty mask".into()]);
    }
    let voxel_volume = mask.voxel_count() as f64 * spacing.iter().product::<f64>();
    let mesh = marching_cubes(mask, spacing);
    let (mesh_volume, area) = (mesh.volume(), mesh.surface_area());

    let [l1, l2, l3] = principal_moments(mask, spacing);
    let (elongation, flatness) = if l1 > 0.0 {
        ((l2 / l1).sqrt(), (l3 / l1).sqrt())
    } else {
        warnings.push("shape: zero principal moments; Elongation and Flatness set to 1".to_string());
        (1.0, 1.0)
    };

    let surf = surface_voxels(mask);
    let pts: Vec<[f64; 3]> = surf.iter().map(|c| [0, 1, 2].map(|a| c[a] as f64 * spacing[a])).collect();
    let sphericity = (36.0 * std::f64::consts::PI * mesh_volume * mesh_volume).cbrt() / area;
    let values = vec![
        elongation,
        flatness,
        4.0 * l3.sqrt(),
        4.0 * l1.sqrt(),
        max_distance(&pts, &surf, Some(1)),
        max_distance(&pts, &surf, Some(0)),
        max_distance(&pts, &surf, Some(2)),
        max_distance(&pts, &surf, None),
        mesh_volume,
        4.0 * l2.sqrt(),
        sphericity,
        area,
        area / mesh_volume,
        voxel_volume,
    ];
    FeatureBlock::new("shape", &FEATURE_NAMES, values, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pruned_diameters_match_all_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let density = rng.gen_range(0.2..0.9);
            let mask = Mask::from_fn([7, 6, 5], |_, _, _| rng.gen_bool(density));
            let keys: Vec<[usize; 3]> = mask.coords().collect();
            let pts: Vec<[f64; 3]> = keys.iter().map(|c| [c[0] as f64 * 0.7, c[1] as f64, c[2] as f64 * 2.5]).collect();
            assert_eq!(max_distance(&pts, &keys, None), max_pairwise(&pts));
            for a in 0..3 {
                let mut brute = 0.0f64;
                for v in 0..8 {
                    let g: Vec<[f64; 3]> = pts.iter().zip(&keys).filter(|(_, k)| k[a] == v).map(|(p, _)| *p).collect();
                    brute = brute.max(max_pairwise(&g));
                }
                assert_eq!(max_distance(&pts, &keys, Some(a)), brute);
            }
        }
    }

    #[test]
    fn two_cube_block() {
        let m = Mask::full([2, 2, 2]);
        let b = compute_shape(&m, [1.0; 3]);
        assert_eq!(b.get("VoxelVolume"), Some(8.0));
        assert!((b.get("Maximum3DDiameter").unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((b.get("Maximum2DDiameterSlice").unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_voxel_degenerates() {
        let b = compute_shape(&Mask::full([1, 1, 1]), [1.0; 3]);
        assert_eq!(b.get("Elongation"), Some(1.0));
        assert_eq!(b.get("Flatness"), Some(1.0));
        assert_eq!(b.get("Maximum3DDiameter"), Some(0.0));
        assert_eq!(b.get("MajorAxisLength"), Some(0.0));
    }

    #[test]
    fn rasterized_sphere() {
        let r = 10.0;
        let m = Mask::from_fn([25, 25, 25], |x, y, z| {
            let d = [x, y, z].map(|c| c as f64 - 12.0);
            d.iter().map(|v| v * v).sum::<f64>() <= r * r
        });
        let b = compute_shape(&m, [1.0; 3]);
        let s = b.get("Sphericity").unwrap();
        // Reference mesher on the same bitmap: V = 4147.8335, A = 1372.042.
        assert!((s - 0.9099085).abs() < 1e-6, "sphericity {s}");
        assert!((b.get("MeshVolume").unwrap() - 4147.8335).abs() < 1e-3);
        assert!((b.get("SurfaceArea").unwrap() - 1372.042).abs() < 1e-3);
        assert!((b.get("Elongation").unwrap() - 1.0).abs() < 0.05);
        assert!((b.get("Flatness").unwrap() - 1.0).abs() < 0.05);
        let analytic = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
        assert!((b.get("MeshVolume").unwrap() / analytic - 1.0).abs() < 0.03);
    }
}
