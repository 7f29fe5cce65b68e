//! Discrete SAMME boosting over depth-1 trees.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<Tree>,
    pub alphas: Vec<f64>,
}

/// Weight given to a stump with zero weighted error.
const PERFECT_ALPHA: f64 = 10.0;

impl AdaBoost {
    pub fn fit(x: &[Vec<f64>], y: &[u8], rounds: usize) -> AdaBoost {
        let n = x.len();
        let mut w = vec![1.0 / n as f64; n];
        let params = TreeParams { max_depth: Some(1), min_samples_leaf: 1, max_features: None };
        let mut out = AdaBoost { stumps: Vec::new(), alphas: Vec::new() };
        for _ in 0..rounds {
            let stump = Tree::fit::<ChaCha8Rng>(x, y, &w, params, None);
            let miss: Vec<bool> = x.iter().zip(y).map(|(xi, &yi)| (stump.predict(xi) > 0.5) != (yi == 1)).collect();
            let total: f64 = w.iter().sum();
            let err = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(wi, _)| wi).sum::<f64>() / total;
            if err >= 0.5 {
                if out.stumps.is_empty() {
                    out.stumps.push(stump);
                    out.alphas.push(1.0);
                }
                break;
            }
            if err <= 0.0 {
                out.stumps.push(stump);
                out.alphas.push(PERFECT_ALPHA);
                break;
            }
            let alpha = ((1.0 - err) / err).ln();
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            out.stumps.push(stump);
            out.alphas.push(alpha);
        }
        out
    }

    /// `(1 + F/Σα) / 2` where `F = Σ αₘ hₘ(x)` with `hₘ ∈ {−1, +1}`.
    pub fn prob(&self, x: &[f64]) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        let f: f64 = self.stumps.iter().zip(&self.alphas).map(|(s, a)| if s.predict(x) > 0.5 { *a } else { -*a }).sum();
        (1.0 + f / total) / 2.0
    }
}
