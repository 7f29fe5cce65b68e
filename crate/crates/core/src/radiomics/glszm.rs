//! Gray-level size-zone matrix over 26-connected zones.

use std::collections::BTreeMap;

use super::texture::{neighbors26, SizeMatrixStats};
use super::FeatureBlock;
use crate::DiscretizedVolume;

pub const FEATURE_NAMES: [&str; 16] = [
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance",
    "HighGrayLevelZoneEmphasis",
    "LargeAreaEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LowGrayLevelZoneEmphasis",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "SmallAreaEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "ZoneEntropy",
    "ZonePercentage",
    "ZoneVariance",
];

/// Zone counts `(level, size) -> count`.
pub fn size_zone_matrix(disc: &DiscretizedVolume) -> BTreeMap<(usize, usize), u64> {
    let [nx, ny, _] = disc.dims();
    let levels = disc.levels();
    let offsets: Vec<[i64; 3]> = neighbors26().collect();
    let mut seen = vec![false; levels.len()];
    let mut zones = BTreeMap::new();
    let mut stack = Vec::new();
    for start in 0..levels.len() {
        let lvl = levels[start];
        if lvl == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y, z) = ((i % nx) as i64, ((i / nx) % ny) as i64, (i / (nx * ny)) as i64);
            for d in &offsets {
                let (qx, qy, qz) = (x + d[0], y + d[1], z + d[2]);
                if disc.level_signed(qx, qy, qz) == lvl {
                    let j = disc.index(qx as usize, qy as usize, qz as usize);
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        *zones.entry((lvl as usize, size)).or_insert(0) += 1;
    }
    zones
}

pub fn matrix_features(zones: &BTreeMap<(usize, usize), u64>, ng: usize, np: usize) -> [f64; 16] {
    let entries: Vec<(usize, usize, u64)> = zones.iter().map(|(&(i, s), &c)| (i, s, c)).collect();
    let max_size = entries.iter().map(|e| e.1).max().unwrap_or(1);
    let s = SizeMatrixStats::compute(&entries, ng, max_size, np);
    [
        s.gray_nonuniformity,
        s.gray_nonuniformity_norm,
        s.gray_variance,
        s.high_gray_emphasis,
        s.large_emphasis,
        s.large_high_gray,
        s.large_low_gray,
        s.low_gray_emphasis,
        s.size_nonuniformity,
        s.size_nonuniformity_norm,
        s.small_emphasis,
        s.small_high_gray,
        s.small_low_gray,
        s.entropy,
        s.percentage,
        s.size_variance,
    ]
}

pub fn compute_glszm(disc: &DiscretizedVolume) -> FeatureBlock {
    let zones = size_zone_matrix(disc);
    if zones.is_empty() {
        return FeatureBlock::new("glszm", &FEATURE_NAMES, vec![0.0; 16], vec!["glszm: empty region".into()]);
    }
    let f = matrix_features(&zones, disc.ng(), disc.voxel_count());
    FeatureBlock::new("glszm", &FEATURE_NAMES, f.to_vec(), Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_isolated_voxels() {
        let mut levels = vec![0u32; 27];
        levels[0] = 1;
        levels[26] = 1;
        let disc = DiscretizedVolume::from_levels([3, 3, 3], levels, 1).unwrap();
        let z = size_zone_matrix(&disc);
        assert_eq!(z.into_iter().collect::<Vec<_>>(), vec![((1, 1), 2)]);
        let b = compute_glszm(&disc);
        assert_eq!(b.get("ZonePercentage"), Some(1.0));
    }

    #[test]
    fn diagonal_neighbours_join() {
        let mut levels = vec![0u32; 27];
        levels[0] = 1;
        levels[13] = 1;
        let disc = DiscretizedVolume::from_levels([3, 3, 3], levels, 1).unwrap();
        assert_eq!(size_zone_matrix(&disc).into_iter().collect::<Vec<_>>(), vec![((1, 2), 1)]);
    }

    #[test]
    fn constant_region() {
        let n = 5 * 4 * 3;
        let disc = DiscretizedVolume::from_levels([5, 4, 3], vec![1; n], 1).unwrap();
        let b = compute_glszm(&disc);
        assert!((b.get("ZonePercentage").unwrap() - 1.0 / n as f64).abs() < 1e-15);
        assert!((b.get("LargeAreaEmphasis").unwrap() - (n * n) as f64).abs() < 1e-9);
    }
}
