//! Binary classifiers behind one serializable spec.

pub mod adaboost;
pub mod forest;
pub mod logistic;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::pipeline::{apply_chain, FittedStep};
use crate::{Error, FeatureTable, Result};
use adaboost::AdaBoost;
use forest::Forest;
use logistic::Logistic;
use svm::{Kernel, Svm};
use tree::{Tree, TreeParams};

pub const LOGISTIC_TOL: f64 = 1e-6;
pub const LOGISTIC_MAX_ITER: usize = 1000;
pub const SVM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// RBF width: a number, or `"scale"` for `1 / (d · Var(X))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gamma {
    Value(f64),
    Named(GammaName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaName {
    Scale,
}

impl Gamma {
    pub const SCALE: Gamma = Gamma::Named(GammaName::Scale);
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn scale() -> Gamma {
    Gamma::SCALE
}
fn hundred() -> usize {
    100
}
fn fifty() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    LogisticRegression {
        #[serde(default = "one")]
        c: f64,
    },
    Svm {
        kernel: KernelKind,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "scale")]
        gamma: Gamma,
    },
    DecisionTree {
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "one_usize")]
        min_samples_leaf: usize,
    },
    RandomForest {
        #[serde(default = "hundred")]
        n_trees: usize,
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "one_usize")]
        min_samples_leaf: usize,
        #[serde(default)]
        seed: u64,
    },
    AdaBoost {
        #[serde(default = "fifty")]
        n_rounds: usize,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::LogisticRegression { .. } => "logistic-regression",
            ModelSpec::Svm { .. } => "svm",
            ModelSpec::DecisionTree { .. } => "decision-tree",
            ModelSpec::RandomForest { .. } => "random-forest",
            ModelSpec::AdaBoost { .. } => "ada-boost",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("{}: {m}", self.kind())));
        match *self {
            ModelSpec::LogisticRegression { c } | ModelSpec::Svm { c, .. } if !(c > 0.0 && c.is_finite()) => {
                bad("C must be positive")
            }
            ModelSpec::Svm { gamma: Gamma::Value(g), .. } if !(g > 0.0 && g.is_finite()) => {
                bad("gamma must be positive")
            }
            ModelSpec::DecisionTree { max_depth: Some(0), .. } | ModelSpec::RandomForest { max_depth: Some(0), .. } => {
                bad("max_depth must be at least 1")
            }
            ModelSpec::DecisionTree { min_samples_leaf: 0, .. }
            | ModelSpec::RandomForest { min_samples_leaf: 0, .. } => bad("min_samples_leaf must be at least 1"),
            ModelSpec::RandomForest { n_trees: 0, .. } => bad("n_trees must be at least 1"),
            ModelSpec::AdaBoost { n_rounds: 0 } => bad("n_rounds must be at least 1"),
            _ => Ok(()),
        }
    }

    /// Fixed default search grids.
    pub fn default_grid(kind: &str) -> Result<Vec<ModelSpec>> {
        let mut grid = Vec::new();
        match kind {
            "logistic-regression" => {
                for c in [0.01, 0.1, 1.0, 10.0, 100.0] {
                    grid.push(ModelSpec::LogisticRegression { c });
                }
            }
            "svm" => {
                for c in [0.1, 1.0, 10.0] {
                    grid.push(ModelSpec::Svm { kernel: KernelKind::Linear, c, gamma: Gamma::SCALE });
                }
                for c in [0.1, 1.0, 10.0] {
                    for gamma in [Gamma::SCALE, Gamma::Value(0.01), Gamma::Value(0.1)] {
                        grid.push(ModelSpec::Svm { kernel: KernelKind::Rbf, c, gamma });
                    }
                }
            }
            "decision-tree" => {
                for d in [2, 4, 8] {
                    for leaf in [1, 5] {
                        grid.push(ModelSpec::DecisionTree { max_depth: Some(d), min_samples_leaf: leaf });
                    }
                }
            }
            "random-forest" => {
                for n in [50, 100] {
                    for d in [None, Some(8)] {
                        grid.push(ModelSpec::RandomForest { n_trees: n, max_depth: d, min_samples_leaf: 1, seed: 0 });
                    }
                }
            }
            "ada-boost" => {
                for n in [25, 50, 100] {
                    grid.push(ModelSpec::AdaBoost { n_rounds: n });
                }
            }
            other => return Err(Error::InvalidParameter(format!("unknown model kind `{other}`"))),
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelParams {
    Logistic(Logistic),
    Svm(Svm),
    Tree(Tree),
    Forest(Forest),
    AdaBoost(AdaBoost),
}

impl ModelParams {
    fn prob(&self, x: &[f64]) -> f64 {
        match self {
            ModelParams::Logistic(m) => m.prob(x),
            ModelParams::Svm(m) => m.prob(x),
            ModelParams::Tree(m) => m.predict(x),
            ModelParams::Forest(m) => m.prob(x),
            ModelParams::AdaBoost(m) => m.prob(x),
        }
    }
}

/// A fitted classifier. Immutable once built and safe to share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub params: ModelParams,
    /// Steps that turn a raw table into this model's input.
    #[serde(default)]
    pub preprocessing: Vec<FittedStep>,
}

pub(crate) fn check_training(x: &[Vec<f64>], y: &[u8], table: &FeatureTable, rows: &[usize]) -> Result<()> {
    if table.n_cols() == 0 {
        return Err(Error::InvalidTable("no feature columns".into()));
    }
    for (k, row) in x.iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: table.row_ids[rows[k]].clone(), column: table.columns[j].clone() });
        }
    }
    if y.iter().all(|&v| v == 1) || y.iter().all(|&v| v == 0) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Fits `spec` on raw feature rows.
pub fn fit_params(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> ModelParams {
    match *spec {
        ModelSpec::LogisticRegression { c } => {
            ModelParams::Logistic(Logistic::fit(x, y, c, LOGISTIC_TOL, LOGISTIC_MAX_ITER))
        }
        ModelSpec::Svm { kernel, c, gamma } => {
            let kernel = match kernel {
                KernelKind::Linear => Kernel::Linear,
                KernelKind::Rbf => Kernel::Rbf {
                    gamma: match gamma {
                        Gamma::Value(g) => g,
                        Gamma::Named(GammaName::Scale) => svm::scale_gamma(x),
                    },
                },
            };
            ModelParams::Svm(Svm::fit(x, y, kernel, c, SVM_TOL))
        }
        ModelSpec::DecisionTree { max_depth, min_samples_leaf } => {
            let w = vec![1.0; x.len()];
            let p = TreeParams { max_depth, min_samples_leaf, max_features: None };
            ModelParams::Tree(Tree::fit::<rand_chacha::ChaCha8Rng>(x, y, &w, p, None))
        }
        ModelSpec::RandomForest { n_trees, max_depth, min_samples_leaf, seed } => {
            ModelParams::Forest(Forest::fit(x, y, n_trees, max_depth, min_samples_leaf, seed))
        }
        ModelSpec::AdaBoost { n_rounds } => ModelParams::AdaBoost(AdaBoost::fit(x, y, n_rounds)),
    }
}

/// Fits on the table's train rows (all rows when none are marked).
pub fn train_classifier(table: &FeatureTable, spec: &ModelSpec) -> Result<TrainedModel> {
    train_on_rows(table, &table.fit_rows(), spec)
}

pub fn train_on_rows(table: &FeatureTable, rows: &[usize], spec: &ModelSpec) -> Result<TrainedModel> {
    spec.validate()?;
    let (x, y) = table.xy(rows)?;
    check_training(&x, &y, table, rows)?;
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: table.columns.clone(),
        params: fit_params(spec, &x, &y),
        preprocessing: Vec::new(),
    })
}

impl TrainedModel {
    pub fn with_preprocessing(mut self, chain: Vec<FittedStep>) -> Self {
        self.preprocessing = chain;
        self
    }

    fn design(&self, table: &FeatureTable) -> Result<Vec<usize>> {
        let missing: Vec<String> = self.feature_names.iter().filter(|n| !table.columns.contains(n)).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::FeatureMismatch { expected: self.feature_names.len(), missing });
        }
        self.feature_names.iter().map(|n| table.column_index(n)).collect()
    }

    /// Positive-class scores in [0, 1] for a table already in model space.
    pub fn score(&self, table: &FeatureTable) -> Result<Vec<f64>> {
        let idx = self.design(table)?;
        table.check_finite()?;
        Ok(table
            .values
            .iter()
            .map(|r| {
                let x: Vec<f64> = idx.iter().map(|&j| r[j]).collect();
                self.params.prob(&x).clamp(0.0, 1.0)
            })
            .collect())
    }

    /// Replays the attached preprocessing on a raw table, then scores it.
    pub fn score_raw(&self, table: &FeatureTable) -> Result<Vec<f64>> {
        self.score(&apply_chain(table, &self.preprocessing)?)
    }

    /// Per-feature magnitudes: |w| for linear models, impurity importance
    /// for trees. `None` for kernel SVMs.
    pub fn feature_weights(&self) -> Option<Vec<f64>> {
        match &self.params {
            ModelParams::Logistic(m) => Some(m.weights.iter().map(|w| w.abs()).collect()),
            ModelParams::Svm(m) if matches!(m.kernel, Kernel::Linear) => {
                let w = m.linear_weights();
                Some(if w.is_empty() {
                    vec![0.0; self.feature_names.len()]
                } else {
                    w.iter().map(|v| v.abs()).collect()
                })
            }
            ModelParams::Svm(_) => None,
            ModelParams::Tree(t) => Some(t.importance.clone()),
            ModelParams::Forest(f) => Some(f.importance()),
            ModelParams::AdaBoost(a) => {
                let mut imp = vec![0.0; self.feature_names.len()];
                for (s, al) in a.stumps.iter().zip(&a.alphas) {
                    for (i, v) in s.importance.iter().enumerate() {
                        imp[i] += al * v;
                    }
                }
                Some(imp)
            }
        }
    }
}
