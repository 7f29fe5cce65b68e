//! ROC/PR summaries and significance tests for binary scores.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::models::TrainedModel;
use crate::{Error, FeatureTable, Result, Split};

/// Reported when the DeLong variance vanishes with AUC ≠ 0.5.
pub const P_SENTINEL: f64 = 1e-10;
pub const DEFAULT_PERMUTATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub roc: Vec<RocPoint>,
    pub auc: f64,
    pub ap: f64,
    pub auc_p_value: f64,
    /// The AUC p-value is the sentinel, not a computed probability.
    pub auc_p_sentinel: bool,
    pub ap_p_value: f64,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

fn class_counts(labels: &[u8]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    Ok((pos, neg))
}

/// Sweeps every unique score as a threshold (`score ≥ t` is positive),
/// starting above the maximum so the curve begins at (0, 0).
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<Vec<RocPoint>> {
    let (p, n) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let top = scores[order[0]];
    let mut out = vec![RocPoint { fpr: 0.0, tpr: 0.0, threshold: top + 1.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        out.push(RocPoint { fpr: fp as f64 / n as f64, tpr: tp as f64 / p as f64, threshold: t });
    }
    Ok(out)
}

/// Mann–Whitney: concordant pairs plus half of the tied pairs, over
/// `n₊·n₋`. Computed from midranks so the numerator is exact.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (p, n) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum keeps midranks integral
    let mut rank2_pos: u64 = 0;
    let mut k = 0;
    while k < order.len() {
        let mut e = k;
        while e < order.len() && scores[order[e]] == scores[order[k]] {
            e += 1;
        }
        let twice_mid = (k + 1 + e) as u64;
        rank2_pos += twice_mid * order[k..e].iter().filter(|&&i| labels[i] == 1).count() as u64;
        k = e;
    }
    let twice_u = rank2_pos - (p * (p + 1)) as u64;
    Ok(twice_u as f64 / 2.0 / (p as f64 * n as f64))
}

pub fn trapezoid_auc(roc: &[RocPoint]) -> f64 {
    roc.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum()
}

/// `Σ (Rₙ − Rₙ₋₁)·Pₙ` over descending unique thresholds.
pub fn average_precision(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let roc = roc_curve(scores, labels)?;
    let p = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n = (labels.len() as f64) - p;
    let mut ap = 0.0;
    for w in roc.windows(2) {
        let tp = w[1].tpr * p;
        let fp = w[1].fpr * n;
        ap += (w[1].tpr - w[0].tpr) * tp / (tp + fp);
    }
    Ok(ap)
}

fn psi(x: f64, y: f64) -> f64 {
    if x > y {
        1.0
    } else if x == y {
        0.5
    } else {
        0.0
    }
}

/// Structural components `(V10, V01)` for positives and negatives.
fn components(scores: &[f64], labels: &[u8]) -> (Vec<f64>, Vec<f64>) {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l == 1).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l != 1).map(|(s, _)| *s).collect();
    let v10 = pos.iter().map(|&x| neg.iter().map(|&y| psi(x, y)).sum::<f64>() / neg.len() as f64).collect();
    let v01 = neg.iter().map(|&y| pos.iter().map(|&x| psi(x, y)).sum::<f64>() / pos.len() as f64).collect();
    (v10, v01)
}

fn cov(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n as f64, b.iter().sum::<f64>() / n as f64);
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelongResult {
    pub auc: f64,
    pub z: f64,
    pub p_value: f64,
    pub sentinel: bool,
}

fn two_sided(effect: f64, var: f64) -> (f64, f64, bool) {
    if var <= 0.0 {
        return if effect == 0.0 { (0.0, 1.0, false) } else { (f64::INFINITY * effect.signum(), P_SENTINEL, true) };
    }
    let z = effect / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);
    if p < P_SENTINEL {
        (z, P_SENTINEL, true)
    } else {
        (z, p, false)
    }
}

/// Two-sided test of `AUC = 0.5` with the DeLong variance estimate.
pub fn delong_test(scores: &[f64], labels: &[u8]) -> Result<DelongResult> {
    let a = auc(scores, labels)?;
    let (v10, v01) = components(scores, labels);
    let var = cov(&v10, &v10) / v10.len() as f64 + cov(&v01, &v01) / v01.len() as f64;
    let (z, p_value, sentinel) = two_sided(a - 0.5, var);
    Ok(DelongResult { auc: a, z, p_value, sentinel })
}

/// Paired DeLong test that two score sets on the same rows share an AUC.
pub fn delong_compare(s1: &[f64], s2: &[f64], labels: &[u8]) -> Result<DelongResult> {
    if s1.len() != s2.len() || s1.len() != labels.len() {
        return Err(Error::InvalidParameter("score vectors must cover the same rows".into()));
    }
    let (a1, a2) = (auc(s1, labels)?, auc(s2, labels)?);
    let (x1, y1) = components(s1, labels);
    let (x2, y2) = components(s2, labels);
    let var = (cov(&x1, &x1) + cov(&x2, &x2) - 2.0 * cov(&x1, &x2)) / x1.len() as f64
        + (cov(&y1, &y1) + cov(&y2, &y2) - 2.0 * cov(&y1, &y2)) / y1.len() as f64;
    let (z, p_value, sentinel) = two_sided(a1 - a2, var);
    Ok(DelongResult { auc: a1 - a2, z, p_value, sentinel })
}

/// `(1 + #{AP_perm ≥ AP}) / (1 + permutations)` over seeded label shuffles.
pub fn ap_permutation_p(scores: &[f64], labels: &[u8], permutations: usize, seed: u64) -> Result<f64> {
    let observed = average_precision(scores, labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = labels.to_vec();
    let mut ge = 0usize;
    for _ in 0..permutations {
        shuffled.shuffle(&mut rng);
        if average_precision(scores, &shuffled)? >= observed {
            ge += 1;
        }
    }
    Ok((1 + ge) as f64 / (1 + permutations) as f64)
}

pub fn confusion(scores: &[f64], labels: &[u8], threshold: f64) -> Confusion {
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

pub fn compute_metrics(scores: &[f64], labels: &[u8], permutations: usize, seed: u64) -> Result<Metrics> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidParameter("scores and labels differ in length".into()));
    }
    let roc = roc_curve(scores, labels)?;
    let d = delong_test(scores, labels)?;
    let c = confusion(scores, labels, 0.5);
    let n = labels.len();
    Ok(Metrics {
        n,
        roc,
        auc: d.auc,
        ap: average_precision(scores, labels)?,
        auc_p_value: d.p_value,
        auc_p_sentinel: d.sentinel,
        ap_p_value: ap_permutation_p(scores, labels, permutations, seed)?,
        confusion: c,
        accuracy: (c.tp + c.tn) as f64 / n as f64,
        sensitivity: c.tp as f64 / (c.tp + c.fn_) as f64,
        specificity: c.tn as f64 / (c.tn + c.fp) as f64,
    })
}

/// Scores `table` (already in model space) on the rows of `split`.
pub fn evaluate(model: &TrainedModel, table: &FeatureTable, split: Split, seed: u64) -> Result<Metrics> {
    let rows = table.rows_in(split);
    if rows.is_empty() {
        return Err(Error::InvalidParameter(format!("no rows in split `{}`", split.as_str())));
    }
    let sub = table.subset_rows(&rows);
    let (_, y) = sub.xy(&(0..rows.len()).collect::<Vec<_>>())?;
    let scores = model.score(&sub)?;
    compute_metrics(&scores, &y, DEFAULT_PERMUTATIONS, seed)
}
