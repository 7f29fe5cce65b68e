//! Feature selection: variance filter, univariate scores, model weights,
//! recursive elimination and consensus across selectors.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::models::logistic::{log1pexp, sigmoid};
use crate::models::svm::{Kernel, Svm};
use crate::models::tree::{Tree, TreeParams};
use crate::models::{check_training, logistic::Logistic, LOGISTIC_MAX_ITER, LOGISTIC_TOL, SVM_TOL};
use crate::pipeline::FittedStep;
use crate::{Error, FeatureTable, Result};

pub const MI_BINS: usize = 8;

/// Outcome of a selector fitted on a table's train rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Kept columns in input order.
    pub kept: Vec<String>,
    /// Score per input column (input order); larger is better.
    pub scores: Vec<(String, f64)>,
    /// Every input column, best first.
    pub ranking: Vec<String>,
    /// Columns in the order recursive elimination dropped them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elimination_order: Vec<String>,
    /// Coefficients per penalty for L1 logistic selection.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub path: Vec<PathPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub coefficients: Vec<f64>,
}

impl Selection {
    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable> {
        table.select_named(&self.kept)
    }

    pub fn step(&self) -> FittedStep {
        FittedStep::Select { columns: self.kept.clone() }
    }

    fn from_scores(table: &FeatureTable, scores: Vec<f64>, keep: impl Fn(usize, f64) -> bool) -> Selection {
        let ranking = rank(&table.columns, &scores);
        let kept = (0..table.n_cols()).filter(|&j| keep(j, scores[j])).map(|j| table.columns[j].clone()).collect();
        Selection {
            kept,
            scores: table.columns.iter().cloned().zip(scores).collect(),
            ranking,
            elimination_order: Vec::new(),
            path: Vec::new(),
        }
    }
}

/// Best first; ties by input position.
fn rank(columns: &[String], scores: &[f64]) -> Vec<String> {
    let mut idx: Vec<usize> = (0..columns.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.into_iter().map(|j| columns[j].clone()).collect()
}

fn top_k(scores: &[f64], k: usize) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut keep = vec![false; scores.len()];
    for &j in idx.iter().take(k) {
        keep[j] = true;
    }
    keep
}

fn nonempty(s: Selection) -> Result<Selection> {
    if s.kept.is_empty() {
        Err(Error::EmptySelection)
    } else {
        Ok(s)
    }
}

fn fit_xy(table: &FeatureTable) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let rows = table.fit_rows();
    let (x, y) = table.xy(&rows)?;
    check_training(&x, &y, table, &rows)?;
    Ok((x, y))
}

fn column_variances(x: &[Vec<f64>], d: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..d)
        .map(|j| {
            let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
            x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
        })
        .collect()
}

/// Drops columns whose population variance over train rows is `≤ t`.
pub fn variance_threshold(table: &FeatureTable, t: f64) -> Result<Selection> {
    table.check_finite()?;
    let rows = table.fit_rows();
    let x: Vec<Vec<f64>> = rows.iter().map(|&r| table.values[r].clone()).collect();
    let var = column_variances(&x, table.n_cols());
    nonempty(Selection::from_scores(table, var, |_, v| v > t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreFunc {
    Chi2,
    AnovaF,
    MutualInfo,
}

/// Either a column count or a percentage of columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KBest {
    K(usize),
    Percentile(f64),
}

fn finite_score(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-f64::MAX, f64::MAX)
    }
}

pub fn chi2_scores(x: &[Vec<f64>], y: &[u8]) -> Result<Vec<f64>> {
    if x.iter().flatten().any(|&v| v < 0.0) {
        return Err(Error::NegativeChi2);
    }
    let d = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    let n1 = y.iter().filter(|&&v| v == 1).count() as f64;
    let prior = [(n - n1) / n, n1 / n];
    Ok((0..d)
        .map(|j| {
            let mut obs = [0.0; 2];
            for (r, &l) in x.iter().zip(y) {
                obs[l as usize] += r[j];
            }
            let total = obs[0] + obs[1];
            let mut chi = 0.0;
            for c in 0..2 {
                let exp = prior[c] * total;
                if exp > 0.0 {
                    chi += (obs[c] - exp).powi(2) / exp;
                }
            }
            chi
        })
        .collect())
}

pub fn anova_f_scores(x: &[Vec<f64>], y: &[u8]) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    (0..d)
        .map(|j| {
            let mut sum = [0.0; 2];
            let mut cnt = [0.0; 2];
            for (r, &l) in x.iter().zip(y) {
                sum[l as usize] += r[j];
                cnt[l as usize] += 1.0;
            }
            let grand = (sum[0] + sum[1]) / n;
            let means = [sum[0] / cnt[0], sum[1] / cnt[1]];
            let between: f64 = (0..2).map(|c| cnt[c] * (means[c] - grand).powi(2)).sum();
            let within: f64 = x.iter().zip(y).map(|(r, &l)| (r[j] - means[l as usize]).powi(2)).sum();
            let (df_b, df_w) = (1.0, n - 2.0);
            if within == 0.0 {
                return if between == 0.0 { 0.0 } else { f64::MAX };
            }
            finite_score((between / df_b) / (within / df_w))
        })
        .collect()
}

/// Quantile bin per value: the bin of a value's first sorted occurrence,
/// so tied values share a bin.
pub fn quantile_bins(col: &[f64], bins: usize) -> Vec<usize> {
    let n = col.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let mut out = vec![0; n];
    let mut k = 0;
    while k < n {
        let b = k * bins / n;
        let mut e = k;
        while e < n && col[order[e]] == col[order[k]] {
            out[order[e]] = b;
            e += 1;
        }
        k = e;
    }
    out
}

/// Plug-in mutual information (nats) between quantile-binned column and
/// label.
pub fn mutual_info_scores(x: &[Vec<f64>], y: &[u8], bins: usize) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    (0..d)
        .map(|j| {
            let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
            let b = quantile_bins(&col, bins);
            let mut joint = vec![[0.0f64; 2]; bins];
            for (&bi, &l) in b.iter().zip(y) {
                joint[bi][l as usize] += 1.0;
            }
            let py = [joint.iter().map(|c| c[0]).sum::<f64>() / n, joint.iter().map(|c| c[1]).sum::<f64>() / n];
            let mut mi = 0.0;
            for c in &joint {
                let pb = (c[0] + c[1]) / n;
                for l in 0..2 {
                    let p = c[l] / n;
                    if p > 0.0 {
                        mi += p * (p / (pb * py[l])).ln();
                    }
                }
            }
            mi.max(0.0)
        })
        .collect()
}

pub fn select_k_best(table: &FeatureTable, k: KBest, score: ScoreFunc) -> Result<Selection> {
    let d = table.n_cols();
    let k = match k {
        KBest::K(k) if k > d => {
            return Err(Error::InvalidParameter(format!("k = {k} exceeds the {d} available columns")))
        }
        KBest::K(k) => k,
        KBest::Percentile(p) if !(0.0..=100.0).contains(&p) => {
            return Err(Error::InvalidParameter(format!("percentile {p} outside [0, 100]")))
        }
        KBest::Percentile(p) => ((p / 100.0 * d as f64) + 1e-9).floor() as usize,
    };
    let (x, y) = fit_xy(table)?;
    let scores = match score {
        ScoreFunc::Chi2 => chi2_scores(&x, &y)?,
        ScoreFunc::AnovaF => anova_f_scores(&x, &y),
        ScoreFunc::MutualInfo => mutual_info_scores(&x, &y, MI_BINS),
    };
    let keep = top_k(&scores, k);
    nonempty(Selection::from_scores(table, scores, |j, _| keep[j]))
}

/// Estimators whose fitted weights rank features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum WeightEstimator {
    L1Logistic {
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    Logistic {
        #[serde(default = "one")]
        c: f64,
    },
    LinearSvm {
        #[serde(default = "one")]
        c: f64,
    },
    Lasso {
        #[serde(default = "default_lambda")]
        alpha: f64,
    },
    Tree {
        #[serde(default)]
        max_depth: Option<usize>,
    },
}

fn default_lambda() -> f64 {
    0.01
}
fn one() -> f64 {
    1.0
}

impl WeightEstimator {
    /// |weight| or importance per column.
    pub fn weights(&self, x: &[Vec<f64>], y: &[u8]) -> Vec<f64> {
        match *self {
            WeightEstimator::L1Logistic { lambda } => {
                l1_logistic(x, y, lambda, None).0.iter().map(|v| v.abs()).collect()
            }
            WeightEstimator::Logistic { c } => {
                Logistic::fit(x, y, c, LOGISTIC_TOL, LOGISTIC_MAX_ITER).weights.iter().map(|v| v.abs()).collect()
            }
            WeightEstimator::LinearSvm { c } => {
                let d = x.first().map_or(0, Vec::len);
                let w = Svm::fit(x, y, Kernel::Linear, c, SVM_TOL).linear_weights();
                if w.is_empty() {
                    vec![0.0; d]
                } else {
                    w.iter().map(|v| v.abs()).collect()
                }
            }
            WeightEstimator::Lasso { alpha } => lasso(x, y, alpha).iter().map(|v| v.abs()).collect(),
            WeightEstimator::Tree { max_depth } => {
                let p = TreeParams { max_depth, min_samples_leaf: 1, max_features: None };
                Tree::fit::<rand_chacha::ChaCha8Rng>(x, y, &vec![1.0; x.len()], p, None).importance
            }
        }
    }
}

/// Smallest penalty at which every L1-logistic coefficient is zero.
pub fn lambda_max(x: &[Vec<f64>], y: &[u8]) -> f64 {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    let ybar = y.iter().map(|&v| v as f64).sum::<f64>() / n;
    (0..d).map(|j| (x.iter().zip(y).map(|(r, &l)| r[j] * (l as f64 - ybar)).sum::<f64>() / n).abs()).fold(0.0, f64::max)
}

/// Proximal gradient (ISTA) for mean log-loss + `λ‖w‖₁`, intercept free.
/// Returns `(w, b)`.
pub fn l1_logistic(x: &[Vec<f64>], y: &[u8], lambda: f64, warm: Option<(Vec<f64>, f64)>) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    // Lipschitz bound of the smooth part via the Frobenius norm
    let lip = 0.25 * (x.iter().flatten().map(|v| v * v).sum::<f64>() + n) / n;
    let step = 1.0 / lip.max(1e-12);
    let (mut w, mut b) = warm.unwrap_or_else(|| (vec![0.0; d], 0.0));
    for _ in 0..20_000 {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (r, &l) in x.iter().zip(y) {
            let z = b + r.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let res = sigmoid(z) - l as f64;
            for j in 0..d {
                gw[j] += res * r[j];
            }
            gb += res;
        }
        let mut change = 0.0f64;
        for j in 0..d {
            let v = w[j] - step * gw[j] / n;
            let nv = v.signum() * (v.abs() - step * lambda).max(0.0);
            change = change.max((nv - w[j]).abs());
            w[j] = nv;
        }
        let nb = b - step * gb / n;
        change = change.max((nb - b).abs());
        b = nb;
        if change < 1e-9 {
            break;
        }
    }
    (w, b)
}

pub fn l1_objective(x: &[Vec<f64>], y: &[u8], lambda: f64, w: &[f64], b: f64) -> f64 {
    let n = x.len() as f64;
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(r, &l)| {
            let z = b + r.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
            log1pexp(z) - l as f64 * z
        })
        .sum();
    loss / n + lambda * w.iter().map(|v| v.abs()).sum::<f64>()
}

/// Coefficients along a geometric penalty grid from `λ_max` down to
/// `λ_max/1000`, warm-started.
pub fn l1_path(x: &[Vec<f64>], y: &[u8], points: usize) -> Vec<PathPoint> {
    let top = lambda_max(x, y);
    let mut warm = None;
    (0..points)
        .map(|i| {
            let lambda = top * 10f64.powf(-3.0 * i as f64 / (points.max(2) - 1) as f64);
            let (w, b) = l1_logistic(x, y, lambda, warm.take());
            warm = Some((w.clone(), b));
            PathPoint { lambda, coefficients: w }
        })
        .collect()
}

/// Coordinate descent for `(1/2n)‖y − Xw − b‖² + α‖w‖₁` on centered data.
pub fn lasso(x: &[Vec<f64>], y: &[u8], alpha: f64) -> Vec<f64> {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    let means: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let xc: Vec<Vec<f64>> = x.iter().map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect()).collect();
    let ybar = y.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mut resid: Vec<f64> = y.iter().map(|&v| v as f64 - ybar).collect();
    let z: Vec<f64> = (0..d).map(|j| xc.iter().map(|r| r[j] * r[j]).sum::<f64>() / n).collect();
    let mut w = vec![0.0; d];
    for _ in 0..10_000 {
        let mut change = 0.0f64;
        for j in 0..d {
            if z[j] == 0.0 {
                continue;
            }
            let rho = xc.iter().zip(&resid).map(|(r, e)| r[j] * e).sum::<f64>() / n + z[j] * w[j];
            let nw = rho.signum() * (rho.abs() - alpha).max(0.0) / z[j];
            let dw = nw - w[j];
            if dw != 0.0 {
                for (e, r) in resid.iter_mut().zip(&xc) {
                    *e -= dw * r[j];
                }
                w[j] = nw;
            }
            change = change.max(dw.abs());
        }
        if change < 1e-10 {
            break;
        }
    }
    w
}

/// Keeps columns with weight `≥ threshold` (default: mean weight), never a
/// zero-weight column, and at most `max_features` of them. With only
/// `max_features` given, the top non-zero columns are kept.
pub fn select_from_model(
    table: &FeatureTable,
    estimator: WeightEstimator,
    threshold: Option<f64>,
    max_features: Option<usize>,
) -> Result<Selection> {
    let (x, y) = fit_xy(table)?;
    let w = estimator.weights(&x, &y);
    let cut = match (threshold, max_features) {
        (Some(t), _) => t,
        (None, Some(_)) => 0.0,
        (None, None) => w.iter().sum::<f64>() / w.len() as f64,
    };
    let cap = top_k(&w, max_features.unwrap_or(w.len()));
    let mut sel = Selection::from_scores(table, w, |j, v| v > 0.0 && v >= cut && cap[j]);
    if let WeightEstimator::L1Logistic { .. } = estimator {
        sel.path = l1_path(&x, &y, 20);
    }
    nonempty(sel)
}

/// Repeatedly fits `estimator` and drops the `step` weakest columns until
/// `n_target` remain.
pub fn rfe(table: &FeatureTable, estimator: WeightEstimator, n_target: usize, step: usize) -> Result<Selection> {
    let d = table.n_cols();
    if n_target == 0 || n_target > d {
        return Err(Error::InvalidParameter(format!("n_target must be in 1..={d}")));
    }
    if step == 0 {
        return Err(Error::InvalidParameter("step must be at least 1".into()));
    }
    let (x, y) = fit_xy(table)?;
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut eliminated = Vec::new();
    let mut last = vec![0.0; d];
    loop {
        let sub: Vec<Vec<f64>> = x.iter().map(|r| remaining.iter().map(|&j| r[j]).collect()).collect();
        let w = estimator.weights(&sub, &y);
        for (k, &j) in remaining.iter().enumerate() {
            last[j] = w[k];
        }
        if remaining.len() <= n_target {
            break;
        }
        let drop = step.min(remaining.len() - n_target);
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        order.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)));
        let mut gone: Vec<usize> = order[..drop].iter().map(|&k| remaining[k]).collect();
        eliminated.extend(gone.iter().copied());
        gone.sort_unstable();
        remaining.retain(|j| gone.binary_search(j).is_err());
    }
    let survivors: Vec<usize> = remaining.clone();
    let mut ranking: Vec<usize> = survivors.clone();
    ranking.sort_by(|&a, &b| last[b].total_cmp(&last[a]).then(a.cmp(&b)));
    ranking.extend(eliminated.iter().rev().copied());
    // score: survivors rank by weight, eliminated columns by how late they went
    let mut scores = vec![0.0; d];
    for (pos, &j) in ranking.iter().enumerate() {
        scores[j] = (d - pos) as f64;
    }
    Ok(Selection {
        kept: survivors.iter().map(|&j| table.columns[j].clone()).collect(),
        scores: table.columns.iter().cloned().zip(scores).collect(),
        ranking: ranking.iter().map(|&j| table.columns[j].clone()).collect(),
        elimination_order: eliminated.iter().map(|&j| table.columns[j].clone()).collect(),
        path: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum SelectorSpec {
    VarianceThreshold {
        threshold: f64,
    },
    KBest {
        k: KBest,
        score: ScoreFunc,
    },
    FromModel {
        estimator: WeightEstimator,
        #[serde(default)]
        threshold: Option<f64>,
        #[serde(default)]
        max_features: Option<usize>,
    },
    Rfe {
        estimator: WeightEstimator,
        n_target: usize,
        #[serde(default = "one_usize")]
        step: usize,
    },
    Stable {
        k: usize,
        selectors: Vec<SelectorSpec>,
    },
}

fn one_usize() -> usize {
    1
}

impl SelectorSpec {
    pub fn run(&self, table: &FeatureTable) -> Result<Selection> {
        match self {
            SelectorSpec::VarianceThreshold { threshold } => variance_threshold(table, *threshold),
            SelectorSpec::KBest { k, score } => select_k_best(table, *k, *score),
            SelectorSpec::FromModel { estimator, threshold, max_features } => {
                select_from_model(table, *estimator, *threshold, *max_features)
            }
            SelectorSpec::Rfe { estimator, n_target, step } => rfe(table, *estimator, *n_target, *step),
            SelectorSpec::Stable { k, selectors } => select_stable(table, *k, selectors),
        }
    }
}

/// Runs every selector and keeps the `k` features chosen most often,
/// breaking ties by mean rank and then by name.
pub fn select_stable(table: &FeatureTable, k: usize, selectors: &[SelectorSpec]) -> Result<Selection> {
    if selectors.is_empty() {
        return Err(Error::InvalidParameter("select_stable needs at least one selector".into()));
    }
    if k == 0 || k > table.n_cols() {
        return Err(Error::InvalidParameter(format!("k must be in 1..={}", table.n_cols())));
    }
    let runs = selectors.iter().map(|s| s.run(table)).collect::<Result<Vec<_>>>()?;
    let mut count: HashMap<&str, usize> = HashMap::new();
    let mut rank_sum: HashMap<&str, f64> = HashMap::new();
    for run in &runs {
        for name in &run.kept {
            *count.entry(name).or_default() += 1;
        }
        for (pos, name) in run.ranking.iter().enumerate() {
            *rank_sum.entry(name).or_default() += pos as f64;
        }
    }
    let m = runs.len() as f64;
    let mut order: Vec<usize> = (0..table.n_cols()).collect();
    let key = |j: usize| {
        let n = table.columns[j].as_str();
        (count.get(n).copied().unwrap_or(0), rank_sum.get(n).copied().unwrap_or(0.0) / m)
    };
    order.sort_by(|&a, &b| {
        let (ca, ra) = key(a);
        let (cb, rb) = key(b);
        cb.cmp(&ca).then(ra.total_cmp(&rb)).then(table.columns[a].cmp(&table.columns[b]))
    });
    let chosen: BTreeMap<usize, ()> = order.iter().take(k).map(|&j| (j, ())).collect();
    let scores: Vec<(String, f64)> =
        table.columns.iter().enumerate().map(|(j, c)| (c.clone(), key(j).0 as f64)).collect();
    Ok(Selection {
        kept: chosen.keys().map(|&j| table.columns[j].clone()).collect(),
        scores,
        ranking: order.iter().map(|&j| table.columns[j].clone()).collect(),
        elimination_order: Vec::new(),
        path: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cols: &[&str], values: Vec<Vec<f64>>, labels: &[u8]) -> FeatureTable {
        FeatureTable::new(
            (0..values.len()).map(|i| format!("r{i}")).collect(),
            cols.iter().map(|c| c.to_string()).collect(),
            values,
        )
        .unwrap()
        .with_labels(labels.iter().map(|&l| Some(l)).collect())
        .unwrap()
    }

    #[test]
    fn variance_cut() {
        // variances: a = 0.09 (values ±0.3), b = 0.25 (values ±0.5), c constant
        let v = vec![vec![0.3, 0.5, 1.0], vec![-0.3, -0.5, 1.0]];
        let t = table(&["a", "b", "c"], v, &[0, 1]);
        assert_eq!(variance_threshold(&t, 0.2).unwrap().kept, vec!["b"]);
        assert_eq!(variance_threshold(&t, 0.0).unwrap().kept, vec!["a", "b"]);
    }

    #[test]
    fn chi2_rejects_negative() {
        let t = table(&["a"], vec![vec![-1.0], vec![1.0]], &[0, 1]);
        assert!(matches!(select_k_best(&t, KBest::K(1), ScoreFunc::Chi2), Err(Error::NegativeChi2)));
        assert!(select_k_best(&t, KBest::K(2), ScoreFunc::AnovaF).is_err());
    }

    #[test]
    fn chi2_matches_contingency_formula() {
        // class 0 sums 1+2 = 3, class 1 sums 6; total 9, priors 1/2
        let t = table(&["a"], vec![vec![1.0], vec![2.0], vec![6.0], vec![0.0]], &[0, 0, 1, 1]);
        let s = select_k_best(&t, KBest::K(1), ScoreFunc::Chi2).unwrap();
        assert!((s.scores[0].1 - (1.5f64.powi(2) / 4.5 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn mi_of_balanced_bins_is_zero() {
        // every quantile bin holds one row of each class
        let y: Vec<u8> = (0..16).map(|i| (i % 2) as u8).collect();
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        assert!(mutual_info_scores(&x, &y, 8)[0].abs() < 1e-15);
        // the label itself carries ln 2 nats
        let x: Vec<Vec<f64>> = y.iter().map(|&l| vec![l as f64]).collect();
        assert!((mutual_info_scores(&x, &y, 8)[0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lasso_soft_thresholds_single_feature() {
        // centered x = ±1, centered y = ±0.5: OLS slope 0.5, lasso 0.5 − α
        let x = vec![vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]];
        let y = [1, 0, 1, 0];
        assert!((lasso(&x, &y, 0.1)[0] - 0.4).abs() < 1e-12);
        assert_eq!(lasso(&x, &y, 0.6)[0], 0.0);
    }

    #[test]
    fn l1_zero_above_lambda_max() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 20.0, ((i * 7) % 5) as f64]).collect();
        let y: Vec<u8> = (0..20).map(|i| (i >= 10) as u8).collect();
        let lm = lambda_max(&x, &y);
        assert!(l1_logistic(&x, &y, lm * 1.01, None).0.iter().all(|&w| w == 0.0));
        assert!(l1_logistic(&x, &y, lm * 0.5, None).0.iter().any(|&w| w != 0.0));
    }

    #[test]
    fn rfe_order_and_noop() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i % 3) as f64, (i >= 15) as u8 as f64 + 0.01 * i as f64, ((i * 7) % 11) as f64])
            .collect();
        let y: Vec<u8> = (0..30).map(|i| (i >= 15) as u8).collect();
        let t = table(&["a", "b", "c"], x, &y);
        let r = rfe(&t, WeightEstimator::Tree { max_depth: None }, 3, 1).unwrap();
        assert!(r.elimination_order.is_empty() && r.kept.len() == 3);
        let r = rfe(&t, WeightEstimator::Tree { max_depth: None }, 1, 5).unwrap();
        assert_eq!(r.kept, vec!["b"]);
        assert_eq!(r.elimination_order.len(), 2);
    }
}
