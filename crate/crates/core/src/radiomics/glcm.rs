//! Gray-level co-occurrence matrices and the 24 Haralick-style features.

use nalgebra::DMatrix;

use super::texture::{entropy2, DIRECTIONS};
use super::FeatureBlock;
use crate::DiscretizedVolume;

pub const FEATURE_NAMES: [&str; 24] = [
    "Autocorrelation",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "Id",
    "Idm",
    "Idmn",
    "Idn",
    "Imc1",
    "Imc2",
    "InverseVariance",
    "JointAverage",
    "JointEnergy",
    "JointEntropy",
    "MCC",
    "MaximumProbability",
    "SumAverage",
    "SumEntropy",
    "SumSquares",
];

/// Raw (unsymmetrized) pair counts for one offset, row-major `ng × ng`,
/// index `(i - 1) * ng + (j - 1)`.
pub fn cooccurrence_counts(disc: &DiscretizedVolume, offset: [i64; 3]) -> Vec<u64> {
    let ng = disc.ng();
    let [nx, ny, nz] = disc.dims();
    let levels = disc.levels();
    let mut counts = vec![0u64; ng * ng];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let a = levels[disc.index(x, y, z)];
                if a == 0 {
                    continue;
                }
                let b = disc.level_signed(x as i64 + offset[0], y as i64 + offset[1], z as i64 + offset[2]);
                if b > 0 {
                    counts[(a as usize - 1) * ng + b as usize - 1] += 1;
                }
            }
        }
    }
    counts
}

/// Symmetrized, normalized matrices for each of the 13 directions. Directions
/// without a single in-mask pair are `None`.
pub fn glcm_matrices(disc: &DiscretizedVolume) -> Vec<Option<Vec<f64>>> {
    let ng = disc.ng();
    DIRECTIONS
        .iter()
        .map(|&d| {
            let c = cooccurrence_counts(disc, d);
            let mut sym = vec![0.0; ng * ng];
            for i in 0..ng {
                for j in 0..ng {
                    sym[i * ng + j] = (c[i * ng + j] + c[j * ng + i]) as f64;
                }
            }
            let total: f64 = sym.iter().sum();
            (total > 0.0).then(|| sym.into_iter().map(|v| v / total).collect())
        })
        .collect()
}

/// The 24 features of one normalized matrix, in [`FEATURE_NAMES`] order.
/// The flag is set when a statistic was degenerate and replaced by 0.
pub fn matrix_features(p: &[f64], ng: usize) -> ([f64; 24], bool) {
    let mut degenerate = false;
    let lvl = |k: usize| (k + 1) as f64;
    let mut px = vec![0.0; ng];
    let mut py = vec![0.0; ng];
    let mut p_sum = vec![0.0; 2 * ng + 1];
    let mut p_diff = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            let v = p[i * ng + j];
            px[i] += v;
            py[j] += v;
            p_sum[i + j + 2] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }
    let mu_x: f64 = (0..ng).map(|i| lvl(i) * px[i]).sum();
    let mu_y: f64 = (0..ng).map(|j| lvl(j) * py[j]).sum();
    let var_x: f64 = (0..ng).map(|i| (lvl(i) - mu_x).powi(2) * px[i]).sum();
    let var_y: f64 = (0..ng).map(|j| (lvl(j) - mu_y).powi(2) * py[j]).sum();

    let mut f = [0.0; 24];
    let mut autocorr = 0.0;
    let (mut prom, mut shade, mut tend) = (0.0, 0.0, 0.0);
    let (mut contrast, mut id, mut idm, mut idmn, mut idn) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut energy, mut max_p, mut sum_sq) = (0.0, 0.0f64, 0.0);
    let (mut hxy1, mut hxy2) = (0.0, 0.0);
    let ngf = ng as f64;
    for i in 0..ng {
        for j in 0..ng {
            let v = p[i * ng + j];
            let (fi, fj) = (lvl(i), lvl(j));
            let pxy = px[i] * py[j];
            if pxy > 0.0 {
                hxy2 -= pxy * pxy.log2();
                if v > 0.0 {
                    hxy1 -= v * pxy.log2();
                }
            }
            if v == 0.0 {
                continue;
            }
            let s = fi + fj - mu_x - mu_y;
            let d = fi - fj;
            autocorr += v * fi * fj;
            prom += v * s.powi(4);
            shade += v * s.powi(3);
            tend += v * s * s;
            contrast += v * d * d;
            id += v / (1.0 + d.abs());
            idm += v / (1.0 + d * d);
            idmn += v / (1.0 + d * d / (ngf * ngf));
            idn += v / (1.0 + d.abs() / ngf);
            energy += v * v;
            max_p = max_p.max(v);
            sum_sq += v * (fi - mu_x).powi(2);
        }
    }
    let hxy = entropy2(p);
    let hx = entropy2(&px);
    let hy = entropy2(&py);

    let correlation = if var_x * var_y > 0.0 {
        (autocorr - mu_x * mu_y) / (var_x.sqrt() * var_y.sqrt())
    } else {
        degenerate = true;
        0.0
    };
    let diff_avg: f64 = p_diff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let diff_var: f64 = p_diff.iter().enumerate().map(|(k, v)| (k as f64 - diff_avg).powi(2) * v).sum();
    let inv_var: f64 = p_diff.iter().enumerate().skip(1).map(|(k, v)| v / (k * k) as f64).sum();
    let sum_avg: f64 = p_sum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let hmax = hx.max(hy);
    let imc1 = if hmax > 0.0 { (hxy - hxy1) / hmax } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2 - hxy)).exp()).abs().sqrt();

    f[0] = autocorr;
    f[1] = prom;
    f[2] = shade;
    f[3] = tend;
    f[4] = contrast;
    f[5] = correlation;
    f[6] = diff_avg;
    f[7] = entropy2(&p_diff);
    f[8] = diff_var;
    f[9] = id;
    f[10] = idm;
    f[11] = idmn;
    f[12] = idn;
    f[13] = imc1;
    f[14] = imc2;
    f[15] = inv_var;
    f[16] = mu_x;
    f[17] = energy;
    f[18] = hxy;
    f[19] = mcc(p, &px, &py, ng);
    f[20] = max_p;
    f[21] = sum_avg;
    f[22] = entropy2(&p_sum);
    f[23] = sum_sq;
    (f, degenerate)
}

/// Maximal correlation coefficient: square root of the second largest
/// eigenvalue of `Q(i,j) = Σ_k p(i,k) p(j,k) / (px(i) py(k))`.
///
/// `Q` is similar to the symmetric `D^{-1/2} P Dy^{-1} Pᵀ D^{-1/2}`, which is
/// what gets decomposed. Levels absent from the matrix are dropped first.
fn mcc(p: &[f64], px: &[f64], py: &[f64], ng: usize) -> f64 {
    let rows: Vec<usize> = (0..ng).filter(|&i| px[i] > 0.0).collect();
    let cols: Vec<usize> = (0..ng).filter(|&k| py[k] > 0.0).collect();
    if rows.len() < 2 {
        return 1.0;
    }
    let n = rows.len();
    let s = DMatrix::from_fn(n, n, |a, b| {
        let (i, j) = (rows[a], rows[b]);
        let acc: f64 = cols.iter().map(|&k| p[i * ng + k] * p[j * ng + k] / py[k]).sum();
        acc / (px[i] * px[j]).sqrt()
    });
    let mut eig: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    eig[1].clamp(0.0, 1.0).sqrt()
}

/// Direction-averaged GLCM features.
pub fn compute_glcm(disc: &DiscretizedVolume) -> FeatureBlock {
    let ng = disc.ng();
    let mut acc = [0.0; 24];
    let mut used = 0usize;
    let mut degenerate = false;
    for p in glcm_matrices(disc).into_iter().flatten() {
        let (f, d) = matrix_features(&p, ng);
        degenerate |= d;
        for (a, v) in acc.iter_mut().zip(f) {
            *a += v;
        }
        used += 1;
    }
    let mut warnings = Vec::new();
    if used == 0 {
        warnings.push("glcm: no voxel pair in any direction; features set to 0".to_string());
    } else {
        acc.iter_mut().for_each(|v| *v /= used as f64);
        if degenerate {
            warnings.push("glcm: zero marginal variance; Correlation set to 0".to_string());
        }
    }
    FeatureBlock::new("glcm", &FEATURE_NAMES, acc.to_vec(), warnings)
}
