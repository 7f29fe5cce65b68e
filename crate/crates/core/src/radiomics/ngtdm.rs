//! Neighbourhood gray-tone difference matrix.

use super::texture::neighbors26;
use super::FeatureBlock;
use crate::DiscretizedVolume;

pub const FEATURE_NAMES: [&str; 5] = ["Busyness", "Coarseness", "Complexity", "Contrast", "Strength"];

/// Coarseness reported when every gray-tone difference is zero.
pub const COARSENESS_CAP: f64 = 1e6;

/// Per gray level `i` (index `i - 1`): voxel count `n_i` and the summed
/// absolute difference `s_i` between `i` and the mean level of its in-mask
/// 26-neighbours. Voxels without any in-mask neighbour are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Ngtdm {
    pub n: Vec<u64>,
    pub s: Vec<f64>,
}

impl Ngtdm {
    pub fn valid_voxels(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn p(&self) -> Vec<f64> {
        let total = self.valid_voxels() as f64;
        self.n.iter().map(|&c| if total > 0.0 { c as f64 / total } else { 0.0 }).collect()
    }
}

pub fn ngtdm_matrix(disc: &DiscretizedVolume) -> Ngtdm {
    let ng = disc.ng();
    let [nx, ny, nz] = disc.dims();
    let offsets: Vec<[i64; 3]> = neighbors26().collect();
    let mut n = vec![0u64; ng];
    let mut s = vec![0.0; ng];
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let lvl = disc.level_signed(x, y, z);
                if lvl == 0 {
                    continue;
                }
                let (mut sum, mut count) = (0u64, 0u64);
                for d in &offsets {
                    let q = disc.level_signed(x + d[0], y + d[1], z + d[2]);
                    if q > 0 {
                        sum += q as u64;
                        count += 1;
                    }
                }
                if count > 0 {
                    n[lvl as usize - 1] += 1;
                    s[lvl as usize - 1] += (lvl as f64 - sum as f64 / count as f64).abs();
                }
            }
        }
    }
    Ngtdm { n, s }
}

/// Busyness, Coarseness, Complexity, Contrast and Strength, in
/// [`FEATURE_NAMES`] order. Zero denominators yield 0 (Coarseness: the cap).
pub fn matrix_features(m: &Ngtdm) -> [f64; 5] {
    let nvp = m.valid_voxels() as f64;
    if nvp == 0.0 {
        return [0.0, COARSENESS_CAP, 0.0, 0.0, 0.0];
    }
    let p = m.p();
    let present: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let ngp = present.len() as f64;
    let lvl = |i: usize| (i + 1) as f64;
    let ps: f64 = present.iter().map(|&i| p[i] * m.s[i]).sum();
    let s_total: f64 = m.s.iter().sum();

    let coarseness = if ps > 0.0 { 1.0 / ps } else { COARSENESS_CAP };
    let (mut contrast_sum, mut busy_den, mut complexity, mut strength_num) = (0.0, 0.0, 0.0, 0.0);
    for &i in &present {
        for &j in &present {
            let d = lvl(i) - lvl(j);
            contrast_sum += p[i] * p[j] * d * d;
            busy_den += (lvl(i) * p[i] - lvl(j) * p[j]).abs();
            complexity += d.abs() * (p[i] * m.s[i] + p[j] * m.s[j]) / (p[i] + p[j]);
            strength_num += (p[i] + p[j]) * d * d;
        }
    }
    let contrast = if ngp > 1.0 { contrast_sum / (ngp * (ngp - 1.0)) * s_total / nvp } else { 0.0 };
    let busyness = if busy_den > 0.0 { ps / busy_den } else { 0.0 };
    let strength = if s_total > 0.0 { strength_num / s_total } else { 0.0 };
    [busyness, coarseness, complexity / nvp, contrast, strength]
}

pub fn compute_ngtdm(disc: &DiscretizedVolume) -> FeatureBlock {
    let m = ngtdm_matrix(disc);
    let f = matrix_features(&m);
    let mut warnings = Vec::new();
    if f[1] == COARSENESS_CAP {
        warnings.push("ngtdm: zero gray-tone difference; Coarseness capped".to_string());
    }
    FeatureBlock::new("ngtdm", &FEATURE_NAMES, f.to_vec(), warnings)
}
