//! L2-regularized logistic regression by gradient descent with Armijo
//! backtracking.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

pub(crate) fn log1pexp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean log-loss plus `‖w‖² / (2·C·n)`; `theta` is `[w…, b]`. The
/// intercept is not penalized.
pub fn objective_and_gradient(x: &[Vec<f64>], y: &[u8], c: f64, theta: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let d = theta.len() - 1;
    let lambda = 1.0 / (c * n);
    let mut f = 0.0;
    let mut g = vec![0.0; d + 1];
    for (xi, &yi) in x.iter().zip(y) {
        let z = theta[d] + xi.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
        f += log1pexp(z) - yi as f64 * z;
        let r = sigmoid(z) - yi as f64;
        for j in 0..d {
            g[j] += r * xi[j];
        }
        g[d] += r;
    }
    f /= n;
    for gj in &mut g {
        *gj /= n;
    }
    for j in 0..d {
        f += 0.5 * lambda * theta[j] * theta[j];
        g[j] += lambda * theta[j];
    }
    (f, g)
}

impl Logistic {
    pub fn fit(x: &[Vec<f64>], y: &[u8], c: f64, tol: f64, max_iter: usize) -> Logistic {
        let d = x.first().map_or(0, Vec::len);
        let mut theta = vec![0.0; d + 1];
        let (mut f, mut g) = objective_and_gradient(x, y, c, &theta);
        let mut step = 1.0;
        let mut iterations = 0;
        while iterations < max_iter {
            let gnorm2: f64 = g.iter().map(|v| v * v).sum();
            if gnorm2.sqrt() < tol {
                break;
            }
            iterations += 1;
            step *= 2.0;
            loop {
                let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
                let (fc, gc) = objective_and_gradient(x, y, c, &cand);
                if fc <= f - 0.5 * step * gnorm2 || step < 1e-20 {
                    theta = cand;
                    f = fc;
                    g = gc;
                    break;
                }
                step /= 2.0;
            }
        }
        let intercept = theta.pop().unwrap_or(0.0);
        Logistic { weights: theta, intercept, iterations }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.intercept + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn prob(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}
