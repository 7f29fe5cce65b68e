//! First-order intensity statistics over the in-mask voxels.

use super::texture::entropy2;
use super::FeatureBlock;
use crate::{DiscretizedVolume, Mask, Volume};

pub const FEATURE_NAMES: [&str; 18] = [
    "10Percentile",
    "90Percentile",
    "Energy",
    "Entropy",
    "InterquartileRange",
    "Kurtosis",
    "Maximum",
    "Mean",
    "MeanAbsoluteDeviation",
    "Median",
    "Minimum",
    "Range",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "Skewness",
    "TotalEnergy",
    "Uniformity",
    "Variance",
];

/// Percentile of sorted data with linear interpolation between ranks.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn compute_first_order(vol: &Volume, mask: &Mask, disc: &DiscretizedVolume) -> FeatureBlock {
    let mut x: Vec<f64> = vol.voxels().iter().zip(mask.bits()).filter(|(_, &m)| m).map(|(&v, _)| v).collect();
    if x.is_empty() {
        return FeatureBlock::new("firstorder", &FEATURE_NAMES, vec![0.0; 18], vec!["firstorder: empty mask".into()]);
    }
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite voxels"));
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let p10 = percentile(&x, 10.0);
    let p90 = percentile(&x, 90.0);
    let robust: Vec<f64> = x.iter().copied().filter(|&v| v >= p10 && v <= p90).collect();
    let robust_mean = robust.iter().sum::<f64>() / robust.len() as f64;
    let rmad = robust.iter().map(|v| (v - robust_mean).abs()).sum::<f64>() / robust.len() as f64;

    let mut hist = vec![0.0; disc.ng()];
    for &l in disc.levels().iter().filter(|&&l| l > 0) {
        hist[l as usize - 1] += 1.0;
    }
    let total: f64 = hist.iter().sum();
    hist.iter_mut().for_each(|h| *h /= total);

    let mut warnings = Vec::new();
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        warnings.push("firstorder: zero variance; Skewness and Kurtosis set to 0".to_string());
        (0.0, 0.0)
    };
    let values = vec![
        p10,
        p90,
        energy,
        entropy2(&hist),
        percentile(&x, 75.0) - percentile(&x, 25.0),
        kurtosis,
        x[x.len() - 1],
        mean,
        x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n,
        percentile(&x, 50.0),
        x[0],
        x[x.len() - 1] - x[0],
        rmad,
        (energy / n).sqrt(),
        skewness,
        vol.voxel_volume() * energy,
        hist.iter().map(|p| p * p).sum(),
        m2,
    ];
    FeatureBlock::new("firstorder", &FEATURE_NAMES, values, warnings)
}
