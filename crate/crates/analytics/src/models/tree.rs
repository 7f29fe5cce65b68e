//! CART classification trees with Gini impurity.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Weighted fraction of positives among training rows in the leaf.
    Leaf {
        p: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// Total weighted impurity decrease per feature.
    pub importance: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all.
    pub max_features: Option<usize>,
}

fn gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    w: &'a [f64],
    params: TreeParams,
    rng: Option<&'a mut R>,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

impl<R: Rng> Builder<'_, R> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let total: f64 = rows.iter().map(|&r| self.w[r]).sum();
        let pos: f64 = rows.iter().filter(|&&r| self.y[r] == 1).map(|&r| self.w[r]).sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { p: if total > 0.0 { pos / total } else { 0.5 } });
        let impurity = gini(pos, total);
        let depth_ok = self.params.max_depth.map_or(true, |m| depth < m);
        if impurity <= 0.0 || !depth_ok || rows.len() < 2 * self.params.min_samples_leaf.max(1) {
            return id;
        }
        let Some((feature, threshold, decrease)) = self.best_split(&rows, total, pos, impurity) else {
            return id;
        };
        self.importance[feature] += decrease;
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    /// Best (feature, threshold, weighted decrease); a zero decrease is still
    /// accepted so symmetric problems such as XOR can be split.
    fn best_split(&mut self, rows: &[usize], total: f64, pos: f64, impurity: f64) -> Option<(usize, f64, f64)> {
        let d = self.x[0].len();
        let mut features: Vec<usize> = match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < d => sample(rng, d, k).into_vec(),
            _ => (0..d).collect(),
        };
        features.sort_unstable();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = rows.to_vec();
        for &f in &features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let (mut lw, mut lp) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                let r = order[k];
                lw += self.w[r];
                if self.y[r] == 1 {
                    lp += self.w[r];
                }
                let (a, b) = (self.x[r][f], self.x[order[k + 1]][f]);
                if a == b || k + 1 < min_leaf || order.len() - k - 1 < min_leaf {
                    continue;
                }
                let (rw, rp) = (total - lw, pos - lp);
                let child = (lw * gini(lp, lw) + rw * gini(rp, rw)) / total;
                let decrease = (impurity - child) * total;
                if best.map_or(true, |(_, _, d)| decrease > d + 1e-12) {
                    best = Some((f, a + (b - a) / 2.0, decrease.max(0.0)));
                }
            }
        }
        best
    }
}

impl Tree {
    pub fn fit<R: Rng>(x: &[Vec<f64>], y: &[u8], w: &[f64], params: TreeParams, rng: Option<&mut R>) -> Tree {
        let d = x.first().map_or(0, Vec::len);
        let rows: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
        let mut b = Builder { x, y, w, params, rng, nodes: Vec::new(), importance: vec![0.0; d] };
        b.build(rows, 0);
        Tree { nodes: b.nodes, importance: b.importance }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { p } => return p,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}
