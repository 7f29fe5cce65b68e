//! C-SVC trained by SMO with second-order working-set selection, plus a
//! Platt sigmoid mapping decision values to probabilities.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp(),
        }
    }
}

/// `1 / (d · Var(X))` over every entry of the matrix; 1 when the data is
/// constant.
pub fn scale_gamma(x: &[Vec<f64>]) -> f64 {
    let d = x.first().map_or(1, Vec::len).max(1);
    let n = (x.len() * d) as f64;
    let mean = x.iter().flatten().sum::<f64>() / n;
    let var = x.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (d as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub kernel: Kernel,
    pub support: Vec<Vec<f64>>,
    /// `αᵢ·yᵢ` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub platt_a: f64,
    pub platt_b: f64,
}

const TAU: f64 = 1e-12;

/// Dual coefficients `α` and offset `ρ`; `y` is ±1.
pub fn smo(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let max_iter = 10_000_000usize.max(100 * n);
    for _ in 0..max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = if y[t] > 0.0 { (alpha[t] < c).then_some(-g[t]) } else { (alpha[t] > 0.0).then_some(g[t]) };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            break;
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let (v, ok) = if y[t] > 0.0 { (g[t], alpha[t] > 0.0) } else { (-g[t], alpha[t] < c) };
            if !ok {
                continue;
            }
            gmax2 = gmax2.max(v);
            let diff = gmax + v;
            if diff > 0.0 {
                let mut quad = k[i][i] + k[t][t] - 2.0 * k[i][t];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(diff * diff) / quad;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < eps || j == usize::MAX {
            break;
        }
        let (ai, aj) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * k[i][j];
        if y[i] != y[j] {
            let mut quad = k[i][i] + k[j][j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k[i][i] + k[j][j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            g[t] += y[t] * (y[i] * k[i][t] * di + y[j] * k[j][t] * dj);
        }
    }
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    (alpha, rho)
}

/// Fits `P(y=1|f) = 1 / (1 + exp(A·f + B))` by the regularized Newton
/// method of Lin, Lin and Weng.
pub fn platt(dec: &[f64], y: &[u8]) -> (f64, f64) {
    let prior1 = y.iter().filter(|&&v| v == 1).count() as f64;
    let prior0 = y.len() as f64 - prior1;
    let (hi, lo) = ((prior1 + 1.0) / (prior1 + 2.0), 1.0 / (prior0 + 2.0));
    let t: Vec<f64> = y.iter().map(|&v| if v == 1 { hi } else { lo }).collect();
    let (min_step, sigma, eps) = (1e-10, 1e-12, 1e-5);
    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let f_of = |a: f64, b: f64| -> f64 {
        dec.iter()
            .zip(&t)
            .map(|(&d, &ti)| {
                let fapb = d * a + b;
                if fapb >= 0.0 {
                    ti * fapb + (1.0 + (-fapb).exp()).ln()
                } else {
                    (ti - 1.0) * fapb + (1.0 + fapb.exp()).ln()
                }
            })
            .sum()
    };
    let mut fval = f_of(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
        for (&d, &ti) in dec.iter().zip(&t) {
            let fapb = d * a + b;
            let (p, q) = if fapb >= 0.0 {
                let e = (-fapb).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = fapb.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += d * d * d2;
            h22 += d2;
            h21 += d * d2;
            let d1 = ti - p;
            g1 += d * d1;
            g2 += d1;
        }
        if g1.abs() < eps && g2.abs() < eps {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= min_step {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = f_of(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < min_step {
            break;
        }
    }
    (a, b)
}

pub fn sigmoid_prob(dec: f64, a: f64, b: f64) -> f64 {
    let fapb = dec * a + b;
    if fapb >= 0.0 {
        (-fapb).exp() / (1.0 + (-fapb).exp())
    } else {
        1.0 / (1.0 + fapb.exp())
    }
}

impl Svm {
    pub fn fit(x: &[Vec<f64>], labels: &[u8], kernel: Kernel, c: f64, tol: f64) -> Svm {
        let n = x.len();
        let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let k: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| kernel.eval(&x[i], &x[j])).collect()).collect();
        let (alpha, rho) = smo(&k, &y, c, tol);
        let mut svm = Svm { kernel, support: Vec::new(), coef: Vec::new(), rho, platt_a: 0.0, platt_b: 0.0 };
        for i in 0..n {
            if alpha[i] > 0.0 {
                svm.support.push(x[i].clone());
                svm.coef.push(alpha[i] * y[i]);
            }
        }
        let dec: Vec<f64> = x.iter().map(|xi| svm.decision(xi)).collect();
        (svm.platt_a, svm.platt_b) = platt(&dec, labels);
        svm
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support.iter().zip(&self.coef).map(|(s, c)| c * self.kernel.eval(s, x)).sum::<f64>() - self.rho
    }

    pub fn prob(&self, x: &[f64]) -> f64 {
        sigmoid_prob(self.decision(x), self.platt_a, self.platt_b)
    }

    /// Primal weights `Σ αᵢ yᵢ xᵢ`; meaningful for the linear kernel.
    pub fn linear_weights(&self) -> Vec<f64> {
        let d = self.support.first().map_or(0, Vec::len);
        let mut w = vec![0.0; d];
        for (s, c) in self.support.iter().zip(&self.coef) {
            for (wj, sj) in w.iter_mut().zip(s) {
                *wj += c * sj;
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_margin_on_two_points() {
        // Max margin between (0,0) and (2,0) is the line x = 1, w = (1, 0).
        let x = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let s = Svm::fit(&x, &[0, 1], Kernel::Linear, 100.0, 1e-6);
        let w = s.linear_weights();
        assert!((w[0] - 1.0).abs() < 1e-6 && w[1].abs() < 1e-12);
        assert!((s.rho - 1.0).abs() < 1e-6);
        assert!(s.prob(&[2.0, 0.0]) > 0.5 && s.prob(&[0.0, 0.0]) < 0.5);
    }

    #[test]
    fn platt_is_monotone_in_decision() {
        let dec = [-2.0, -1.0, -0.5, 0.3, 1.0, 2.0];
        let (a, b) = platt(&dec, &[0, 0, 1, 0, 1, 1]);
        assert!(a < 0.0);
        assert!(sigmoid_prob(2.0, a, b) > sigmoid_prob(-2.0, a, b));
    }

    #[test]
    fn scale_gamma_matches_definition() {
        let x = vec![vec![0.0, 2.0], vec![4.0, 2.0]];
        // entries {0,2,4,2}: mean 2, var 2, d 2
        assert_eq!(scale_gamma(&x), 0.25);
    }
}
