//! Bagged trees with per-split feature subsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Tree `t` draws from its own stream seeded by `(seed, t)`, so the
    /// forest is identical however the trees are scheduled.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[u8],
        n_trees: usize,
        max_depth: Option<usize>,
        min_samples_leaf: usize,
        seed: u64,
    ) -> Forest {
        let n = x.len();
        let d = x.first().map_or(1, Vec::len);
        let max_features = ((d as f64).sqrt().floor() as usize).max(1);
        let params = TreeParams { max_depth, min_samples_leaf, max_features: Some(max_features) };
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[rng.gen_range(0..n)] += 1.0;
                }
                Tree::fit(x, y, &w, params, Some(&mut rng))
            })
            .collect();
        Forest { trees }
    }

    pub fn prob(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn importance(&self) -> Vec<f64> {
        let d = self.trees.first().map_or(0, |t| t.importance.len());
        let mut imp = vec![0.0; d];
        for t in &self.trees {
            let total: f64 = t.importance.iter().sum();
            if total > 0.0 {
                for (a, b) in imp.iter_mut().zip(&t.importance) {
                    *a += b / total;
                }
            }
        }
        imp
    }
}
