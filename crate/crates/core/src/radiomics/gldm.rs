//! Gray-level dependence matrix.

use std::collections::BTreeMap;

use super::texture::neighbors26;
use super::FeatureBlock;
use crate::DiscretizedVolume;

pub const FEATURE_NAMES: [&str; 14] = [
    "DependenceEntropy",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "DependenceVariance",
    "GrayLevelNonUniformity",
    "GrayLevelVariance",
    "HighGrayLevelEmphasis",
    "LargeDependenceEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LowGrayLevelEmphasis",
    "SmallDependenceEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
];

/// Voxel counts keyed by `(level, k)`, where `k` is the number of in-mask
/// 26-neighbours whose level differs by at most `alpha`.
pub fn dependence_matrix(disc: &DiscretizedVolume, alpha: u32) -> BTreeMap<(usize, usize), u64> {
    let [nx, ny, nz] = disc.dims();
    let offsets: Vec<[i64; 3]> = neighbors26().collect();
    let mut out = BTreeMap::new();
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let lvl = disc.level_signed(x, y, z);
                if lvl == 0 {
                    continue;
                }
                let k = offsets
                    .iter()
                    .filter(|d| {
                        let q = disc.level_signed(x + d[0], y + d[1], z + d[2]);
                        q > 0 && q.abs_diff(lvl) <= alpha
                    })
                    .count();
                *out.entry((lvl as usize, k)).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Features with dependence size `j = k + 1`, so a voxel with no dependent
/// neighbour sits in the first column.
pub fn matrix_features(dep: &BTreeMap<(usize, usize), u64>, ng: usize) -> [f64; 14] {
    let nz: f64 = dep.values().map(|&c| c as f64).sum();
    let mut per_gray = vec![0.0; ng + 1];
    let mut per_dep = vec![0.0; 28];
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    let mut f = [0.0; 14];
    for (&(i, k), &c) in dep {
        let p = c as f64 / nz;
        let (fi, fj) = (i as f64, (k + 1) as f64);
        per_gray[i] += c as f64;
        per_dep[k + 1] += c as f64;
        mu_i += p * fi;
        mu_j += p * fj;
        f[0] -= p * p.log2();
        f[6] += p * fi * fi;
        f[7] += p * fj * fj;
        f[8] += p * fi * fi * fj * fj;
        f[9] += p * fj * fj / (fi * fi);
        f[10] += p / (fi * fi);
        f[11] += p / (fj * fj);
        f[12] += p * fi * fi / (fj * fj);
        f[13] += p / (fi * fi * fj * fj);
    }
    for (&(i, k), &c) in dep {
        let p = c as f64 / nz;
        f[3] += p * ((k + 1) as f64 - mu_j).powi(2);
        f[5] += p * (i as f64 - mu_i).powi(2);
    }
    f[1] = per_dep.iter().map(|v| v * v).sum::<f64>() / nz;
    f[2] = f[1] / nz;
    f[4] = per_gray.iter().map(|v| v * v).sum::<f64>() / nz;
    f
}

pub fn compute_gldm(disc: &DiscretizedVolume, alpha: u32) -> FeatureBlock {
    let dep = dependence_matrix(disc, alpha);
    if dep.is_empty() {
        return FeatureBlock::new("gldm", &FEATURE_NAMES, vec![0.0; 14], vec!["gldm: empty region".into()]);
    }
    FeatureBlock::new("gldm", &FEATURE_NAMES, matrix_features(&dep, disc.ng()).to_vec(), Vec::new())
}
