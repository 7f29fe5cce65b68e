//! Gray-level run-length matrices.

use std::collections::BTreeMap;

use super::texture::{SizeMatrixStats, DIRECTIONS};
use super::FeatureBlock;
use crate::DiscretizedVolume;

pub const FEATURE_NAMES: [&str; 16] = [
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance",
    "HighGrayLevelRunEmphasis",
    "LongRunEmphasis",
    "LongRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LowGrayLevelRunEmphasis",
    "RunEntropy",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "RunVariance",
    "ShortRunEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "ShortRunLowGrayLevelEmphasis",
];

/// Run counts `(level, length) -> count` for one direction. A run is a
/// maximal line of equal in-mask levels; leaving the mask ends a run.
pub fn run_length_matrix(disc: &DiscretizedVolume, dir: [i64; 3]) -> BTreeMap<(usize, usize), u64> {
    let [nx, ny, nz] = disc.dims();
    let levels = disc.levels();
    let longest = nx.max(ny).max(nz) + 1;
    let mut dense = vec![0u64; (disc.ng() + 1) * longest];
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let lvl = levels[disc.index(x as usize, y as usize, z as usize)];
                if lvl == 0 || disc.level_signed(x - dir[0], y - dir[1], z - dir[2]) == lvl {
                    continue;
                }
                // (x, y, z) starts a run
                let mut len = 1usize;
                let (mut cx, mut cy, mut cz) = (x + dir[0], y + dir[1], z + dir[2]);
                while disc.level_signed(cx, cy, cz) == lvl {
                    len += 1;
                    cx += dir[0];
                    cy += dir[1];
                    cz += dir[2];
                }
                dense[lvl as usize * longest + len] += 1;
            }
        }
    }
    dense.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| ((i / longest, i % longest), c)).collect()
}

pub fn matrix_features(runs: &BTreeMap<(usize, usize), u64>, ng: usize, np: usize) -> [f64; 16] {
    let entries: Vec<(usize, usize, u64)> = runs.iter().map(|(&(i, l), &c)| (i, l, c)).collect();
    let max_len = entries.iter().map(|e| e.1).max().unwrap_or(1);
    let s = SizeMatrixStats::compute(&entries, ng, max_len, np);
    [
        s.gray_nonuniformity,
        s.gray_nonuniformity_norm,
        s.gray_variance,
        s.high_gray_emphasis,
        s.large_emphasis,
        s.large_high_gray,
        s.large_low_gray,
        s.low_gray_emphasis,
        s.entropy,
        s.size_nonuniformity,
        s.size_nonuniformity_norm,
        s.percentage,
        s.size_variance,
        s.small_emphasis,
        s.small_high_gray,
        s.small_low_gray,
    ]
}

/// Direction-averaged run-length features.
pub fn compute_glrlm(disc: &DiscretizedVolume) -> FeatureBlock {
    let np = disc.voxel_count();
    let mut acc = [0.0; 16];
    let mut used = 0usize;
    for dir in DIRECTIONS {
        let runs = run_length_matrix(disc, dir);
        if runs.is_empty() {
            continue;
        }
        for (a, v) in acc.iter_mut().zip(matrix_features(&runs, disc.ng(), np)) {
            *a += v;
        }
        used += 1;
    }
    let mut warnings = Vec::new();
    if used == 0 {
        warnings.push("glrlm: empty region; features set to 0".to_string());
    } else {
        acc.iter_mut().for_each(|v| *v /= used as f64);
    }
    FeatureBlock::new("glrlm", &FEATURE_NAMES, acc.to_vec(), warnings)
}
