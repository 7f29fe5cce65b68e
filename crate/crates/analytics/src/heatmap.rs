//! Clustered row and column orderings for heatmaps.

use kodama::{linkage, Method};
use serde::{Deserialize, Serialize};

use crate::FeatureTable;

/// One agglomeration step. Clusters `0..n` are leaves; step `k` creates
/// cluster `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapOrder {
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    pub row_dendrogram: Vec<Merge>,
    pub col_dendrogram: Vec<Merge>,
    /// The z-scored matrix in original order.
    pub zscores: Vec<Vec<f64>>,
}

/// Per-column z-scores with the population σ; constant columns become 0.
pub fn zscore(values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = values.len() as f64;
    let d = values.first().map_or(0, Vec::len);
    let mut out = values.to_vec();
    for j in 0..d {
        let m = values.iter().map(|r| r[j]).sum::<f64>() / n;
        let s = (values.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n).sqrt();
        for r in out.iter_mut() {
            r[j] = if s > 0.0 { (r[j] - m) / s } else { 0.0 };
        }
    }
    out
}

/// Average-linkage dendrogram over Euclidean distances.
pub fn average_linkage(points: &[Vec<f64>]) -> Vec<Merge> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            condensed.push(points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt());
        }
    }
    linkage(&mut condensed, n, Method::Average)
        .steps()
        .iter()
        .map(|s| Merge { a: s.cluster1, b: s.cluster2, height: s.dissimilarity, size: s.size })
        .collect()
}

/// Leaves left to right; at each merge the smaller subtree goes first,
/// equal sizes ordered by their smallest leaf.
pub fn leaf_order(merges: &[Merge], n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut size = vec![1usize; n + merges.len()];
    let mut min_leaf: Vec<usize> = (0..n + merges.len()).collect();
    for (k, m) in merges.iter().enumerate() {
        size[n + k] = size[m.a] + size[m.b];
        min_leaf[n + k] = min_leaf[m.a].min(min_leaf[m.b]);
    }
    let mut out = Vec::with_capacity(n);
    let mut stack = vec![n + merges.len() - 1];
    while let Some(c) = stack.pop() {
        if c < n {
            out.push(c);
            continue;
        }
        let m = merges[c - n];
        let (first, second) =
            if (size[m.a], min_leaf[m.a]) <= (size[m.b], min_leaf[m.b]) { (m.a, m.b) } else { (m.b, m.a) };
        stack.push(second);
        stack.push(first);
    }
    out
}

pub fn heatmap_order(table: &FeatureTable) -> HeatmapOrder {
    let z = zscore(&table.values);
    let d = table.n_cols();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| z.iter().map(|r| r[j]).collect()).collect();
    let row_dendrogram = average_linkage(&z);
    let col_dendrogram = average_linkage(&cols);
    HeatmapOrder {
        row_order: leaf_order(&row_dendrogram, table.n_rows()),
        col_order: leaf_order(&col_dendrogram, d),
        row_dendrogram,
        col_dendrogram,
        zscores: z,
    }
}
