//! Random, queue-ordered and hyperband hyperparameter search.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Config = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Domain {
    Uniform {
        low: f64,
        high: f64,
    },
    LogUniform {
        low: f64,
        high: f64,
    },
    Choice {
        values: Vec<f64>,
    },
    /// Inclusive on both ends.
    IntRange {
        low: i64,
        high: i64,
    },
}

impl Domain {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Domain::Uniform { low, high } => low + rng.gen::<f64>() * (high - low),
            Domain::LogUniform { low, high } => (low.ln() + rng.gen::<f64>() * (high.ln() - low.ln())).exp(),
            Domain::Choice { values } => values[rng.gen_range(0..values.len())],
            Domain::IntRange { low, high } => rng.gen_range(*low..=*high) as f64,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Domain::Uniform { low, high } => low <= high,
            Domain::LogUniform { low, high } => *low > 0.0 && low <= high,
            Domain::Choice { values } => !values.is_empty(),
            Domain::IntRange { low, high } => low <= high,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad domain for `{name}`")))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub domains: BTreeMap<String, Domain>,
    /// Explicit configurations for the queue strategy, evaluated in order.
    #[serde(default)]
    pub queue: Vec<Config>,
}

impl SearchSpace {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Config {
        self.domains.iter().map(|(k, d)| (k.clone(), d.sample(rng))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Fifo,
    Hyperband,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub strategy: Strategy,
    /// Resource units of one full evaluation.
    pub max_resource: u64,
    #[serde(default = "default_eta")]
    pub eta: u64,
    pub total_budget: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_eta() -> u64 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub config_id: usize,
    pub config: Config,
    pub resource: u64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rung: Option<u32>,
}

/// Planned configurations `n` and initial resource `r` of one bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub s: u32,
    pub n: u64,
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best_config_id: usize,
    pub best_config: Config,
    pub best_score: f64,
    pub trials: Vec<Trial>,
    pub consumed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<Bracket>,
}

/// Largest `s` with `η^s ≤ R`.
pub fn s_max(r: u64, eta: u64) -> u32 {
    let mut s = 0;
    let mut p = eta;
    while p <= r {
        s += 1;
        p = p.saturating_mul(eta);
    }
    s
}

/// `s = s_max..0`, `n = ⌈(s_max+1)/(s+1)·η^s⌉`, `r = R·η^(−s)`.
pub fn hyperband_brackets(r: u64, eta: u64) -> Vec<Bracket> {
    let sm = s_max(r, eta);
    (0..=sm)
        .rev()
        .map(|s| {
            let pow = eta.pow(s);
            let num = (sm as u64 + 1) * pow;
            let den = s as u64 + 1;
            Bracket { s, n: num.div_ceil(den), r: r / pow }
        })
        .collect()
}

/// Resource consumed by running every bracket to completion.
pub fn hyperband_total(r: u64, eta: u64) -> u64 {
    hyperband_brackets(r, eta)
        .iter()
        .map(|b| {
            let (mut n, mut res, mut total) = (b.n, b.r, 0);
            for _ in 0..=b.s {
                total += n * res;
                n /= eta;
                res *= eta;
            }
            total
        })
        .sum()
}

/// Maximizes `objective(config, resource)`. Evaluations of one round may
/// run concurrently; results are merged by position.
pub fn hyperparameter_search<F>(objective: F, space: &SearchSpace, budget: &SearchBudget) -> Result<SearchOutcome>
where
    F: Fn(&Config, u64) -> Result<f64> + Sync,
{
    let r = budget.max_resource;
    if r < 1 {
        return Err(Error::InvalidParameter("max_resource must be at least 1".into()));
    }
    if budget.eta < 2 {
        return Err(Error::InvalidParameter("eta must be at least 2".into()));
    }
    if budget.total_budget < r {
        return Err(Error::Budget(format!("{} units cannot pay for one evaluation at {r}", budget.total_budget)));
    }
    for (k, d) in &space.domains {
        d.validate(k)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut trials = Vec::new();
    let mut consumed = 0u64;
    let mut brackets = Vec::new();
    let run = |batch: &[(usize, Config)], resource: u64| -> Result<Vec<f64>> {
        batch.par_iter().map(|(_, c)| objective(c, resource)).collect()
    };
    match budget.strategy {
        Strategy::Random => {
            let count = (budget.total_budget / r) as usize;
            let batch: Vec<(usize, Config)> = (0..count).map(|i| (i, space.sample(&mut rng))).collect();
            for ((id, config), score) in batch.iter().cloned().zip(run(&batch, r)?) {
                trials.push(Trial { config_id: id, config, resource: r, score, bracket: None, rung: None });
                consumed += r;
            }
        }
        Strategy::Fifo => {
            if space.queue.is_empty() {
                return Err(Error::InvalidParameter("the queue strategy needs a non-empty queue".into()));
            }
            let count = ((budget.total_budget / r) as usize).min(space.queue.len());
            let batch: Vec<(usize, Config)> = space.queue[..count].iter().cloned().enumerate().collect();
            for ((id, config), score) in batch.iter().cloned().zip(run(&batch, r)?) {
                trials.push(Trial { config_id: id, config, resource: r, score, bracket: None, rung: None });
                consumed += r;
            }
        }
        Strategy::Hyperband => {
            brackets = hyperband_brackets(r, budget.eta);
            let mut next_id = 0;
            'outer: for b in &brackets {
                let mut live: Vec<(usize, Config)> = (0..b.n)
                    .map(|_| {
                        next_id += 1;
                        (next_id - 1, space.sample(&mut rng))
                    })
                    .collect();
                let mut res = b.r;
                for rung in 0..=b.s {
                    let affordable = ((budget.total_budget - consumed) / res) as usize;
                    let truncated = affordable < live.len();
                    live.truncate(affordable);
                    if live.is_empty() {
                        break 'outer;
                    }
                    let scores = run(&live, res)?;
                    for ((id, config), &score) in live.iter().zip(&scores) {
                        trials.push(Trial {
                            config_id: *id,
                            config: config.clone(),
                            resource: res,
                            score,
                            bracket: Some(b.s),
                            rung: Some(rung),
                        });
                        consumed += res;
                    }
                    if truncated {
                        break 'outer;
                    }
                    let keep = live.len() / budget.eta as usize;
                    let mut order: Vec<usize> = (0..live.len()).collect();
                    order.sort_by(|&a, &c| scores[c].total_cmp(&scores[a]).then(a.cmp(&c)));
                    order.truncate(keep);
                    order.sort_unstable();
                    live = order.into_iter().map(|k| live[k].clone()).collect();
                    res *= budget.eta;
                }
            }
        }
    }
    // prefer the most-resourced evaluations, then the best score, then the earliest
    let top = trials.iter().map(|t| t.resource).max().unwrap_or(0);
    let best = trials
        .iter()
        .filter(|t| t.resource == top)
        .fold(None::<&Trial>, |acc, t| match acc {
            Some(a) if a.score >= t.score => Some(a),
            _ => Some(t),
        })
        .ok_or_else(|| Error::Budget("no configuration was evaluated".into()))?;
    Ok(SearchOutcome {
        best_config_id: best.config_id,
        best_config: best.config.clone(),
        best_score: best.score,
        trials,
        consumed,
        brackets,
    })
}
