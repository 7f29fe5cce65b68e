//! Exact t-SNE for small tables.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_POINTS: usize = 5000;
const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;
const MIN_LEARNING_RATE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
    /// KL(P‖Q) after each iteration, measured without exaggeration.
    pub kl: Vec<f64>,
}

/// Row-conditional affinities whose entropy matches `ln(perplexity)`.
fn conditional_p(d2: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let n = d2.len();
    let target = perplexity.ln();
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (mut beta, mut lo, mut hi) = (1.0, f64::NEG_INFINITY, f64::INFINITY);
        for _ in 0..200 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            let dmin = (0..n).filter(|&j| j != i).map(|j| d2[i][j]).fold(f64::INFINITY, f64::min);
            for j in 0..n {
                if j != i {
                    let v = (-(d2[i][j] - dmin) * beta).exp();
                    p[i][j] = v;
                    sum += v;
                    weighted += (d2[i][j] - dmin) * v;
                }
            }
            let h = sum.ln() + beta * weighted / sum;
            for v in p[i].iter_mut() {
                *v /= sum;
            }
            let diff = h - target;
            if diff.abs() < 1e-5 {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = if lo.is_finite() { (beta + lo) / 2.0 } else { beta / 2.0 };
            }
        }
    }
    p
}

pub fn tsne(x: &[Vec<f64>], perplexity: f64, iterations: usize, seed: u64) -> Result<Embedding> {
    let n = x.len();
    if n > MAX_POINTS {
        return Err(Error::InvalidParameter(format!("t-SNE is exact and limited to {MAX_POINTS} rows")));
    }
    if n < 2 || perplexity <= 0.0 || perplexity >= (n as f64 - 1.0) / 3.0 {
        return Err(Error::InvalidParameter(format!(
            "perplexity {perplexity} must be positive and below (n - 1)/3 = {}",
            (n as f64 - 1.0) / 3.0
        )));
    }
    let d2: Vec<Vec<f64>> =
        x.iter().map(|a| x.iter().map(|b| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()).collect()).collect();
    let cond = conditional_p(&d2, perplexity);
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i][j] = ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(1e-12);
            }
        }
    }
    let mut y = pca_init(x, seed);
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    // learning rate scaled with n, floored as in common practice
    let lr = (n as f64 / EXAGGERATION / 4.0).max(MIN_LEARNING_RATE);
    let mut kl = Vec::with_capacity(iterations);
    let mut num = vec![vec![0.0; n]; n];
    for it in 0..iterations {
        let exag = if it < EXAGGERATION_ITERS { EXAGGERATION } else { 1.0 };
        let momentum = if it < EXAGGERATION_ITERS { 0.5 } else { 0.8 };
        let mut zsum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let dx = y[i][0] - y[j][0];
                    let dy = y[i][1] - y[j][1];
                    num[i][j] = 1.0 / (1.0 + dx * dx + dy * dy);
                    zsum += num[i][j];
                }
            }
        }
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i != j {
                    let q = (num[i][j] / zsum).max(1e-12);
                    let m = 4.0 * (exag * p[i][j] - q) * num[i][j];
                    g[0] += m * (y[i][0] - y[j][0]);
                    g[1] += m * (y[i][1] - y[j][1]);
                }
            }
            for k in 0..2 {
                gains[i][k] = if (g[k] > 0.0) != (velocity[i][k] > 0.0) {
                    gains[i][k] + 0.2
                } else {
                    (gains[i][k] * 0.8).max(0.01)
                };
                velocity[i][k] = momentum * velocity[i][k] - lr * gains[i][k] * g[k];
            }
        }
        for i in 0..n {
            y[i][0] += velocity[i][0];
            y[i][1] += velocity[i][1];
        }
        let mean = [y.iter().map(|v| v[0]).sum::<f64>() / n as f64, y.iter().map(|v| v[1]).sum::<f64>() / n as f64];
        for v in &mut y {
            v[0] -= mean[0];
            v[1] -= mean[1];
        }
        kl.push(kl_divergence(&p, &y));
    }
    Ok(Embedding { coords: y, kl })
}

/// Projection on the two leading principal axes, scaled so the first axis
/// has standard deviation 1e-4. Identical rows start at identical points.
/// Missing axes (rank < 2) are filled with seeded noise of the same scale.
fn pca_init(x: &[Vec<f64>], seed: u64) -> Vec<[f64; 2]> {
    let n = x.len();
    let d = x[0].len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, d, |i, j| x[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut axes: Vec<usize> = (0..d).collect();
    axes.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut proj = vec![[0.0; 2]; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    for k in 0..2 {
        let usable = axes.get(k).filter(|&&a| eig.eigenvalues[a] > 1e-12 * eig.eigenvalues[axes[0]].max(1e-300));
        match usable {
            Some(&a) => {
                let mut v: Vec<f64> = (0..d).map(|j| eig.eigenvectors[(j, a)]).collect();
                // fix the sign so the result does not depend on the solver
                let pivot = v.iter().cloned().fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
                if pivot < 0.0 {
                    v.iter_mut().for_each(|c| *c = -*c);
                }
                for (i, p) in proj.iter_mut().enumerate() {
                    p[k] = (0..d).map(|j| centered[(i, j)] * v[j]).sum();
                }
            }
            None => proj.iter_mut().for_each(|p| p[k] = normal.sample(&mut rng)),
        }
    }
    let sd = (proj.iter().map(|p| p[0] * p[0]).sum::<f64>() / n as f64).sqrt();
    let f = if sd > 0.0 { 1e-4 / sd } else { 1e-4 };
    proj.iter().map(|p| [p[0] * f, p[1] * f]).collect()
}

fn kl_divergence(p: &[Vec<f64>], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let mut zsum = 0.0;
    let mut num = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                num[i][j] = 1.0 / (1.0 + dx * dx + dy * dy);
                zsum += num[i][j];
            }
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let q = (num[i][j] / zsum).max(1e-12);
                kl += p[i][j] * (p[i][j] / q).ln();
            }
        }
    }
    kl
}
