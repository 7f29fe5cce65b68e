//! Builds a classification graph over a synthetic feature table, runs it,
//! saves the run as an experiment and re-tests the stored model on the
//! validation rows.
//!
//! The graph: min-max scaling, model-based selection, an SVM grid search
//! and a hyperband-tuned logistic regression, each evaluated on the
//! validation split.

use radiowb_analytics::{FeatureTable, Split};
use radiowb_graph::{validate, Edge, Engine, ExperimentStore, GraphSpec, NodeSpec, Registry, RunContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

/// 160 rows, 60 columns; the first five shift with the label.
fn cohort(seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<Option<u8>> = (0..160).map(|i| Some((i % 2) as u8)).collect();
    let values = labels
        .iter()
        .map(|y| {
            (0..60)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    let shift = if j < 5 { 1.2 * y.unwrap() as f64 } else { 0.0 };
                    50.0 + 8.0 * (z + shift)
                })
                .collect()
        })
        .collect();
    let rows = (0..160).map(|i| format!("patient{i:03}")).collect();
    let cols = (0..60).map(|j| format!("feature{j:02}")).collect();
    FeatureTable::new(rows, cols, values).unwrap().with_labels(labels).unwrap()
}

fn graph() -> GraphSpec {
    let n = |id: &str, ty: &str, p| NodeSpec::new(id, ty, p);
    let search = json!({
        "kind": "logistic-regression",
        "space": {"domains": {"c": {"type": "log-uniform", "low": 0.01, "high": 100.0}}},
        "budget": {"strategy": "hyperband", "max_resource": 27, "total_budget": 400, "seed": 2}
    });
    GraphSpec::new(
        vec![
            n("load", "table-loader", json!({"path": "cohort.csv"})),
            n("split", "split", json!({"fraction": 0.8})),
            n("minmax", "scaler", json!({"kind": "min-max"})),
            n("select", "select-from-model", json!({"estimator": {"type": "logistic"}, "max_features": 20})),
            n("svm", "grid-search", json!({"kind": "svm", "folds": 5})),
            n("svm-metrics", "evaluate", json!({"permutations": 500})),
            n("tuned", "hyperparameter-search", search),
            n("tuned-metrics", "evaluate", json!({"permutations": 500})),
        ],
        vec![
            Edge::new("load", "split", "table"),
            Edge::new("split", "minmax", "table"),
            Edge::new("minmax", "select", "table"),
            Edge::new("select", "svm", "table"),
            Edge::new("svm", "svm-metrics", "model"),
            Edge::new("select", "tuned", "table"),
            Edge::new("tuned", "tuned-metrics", "model"),
        ],
    )
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    std::fs::write(dir.path().join("cohort.csv"), cohort(11).to_csv())?;

    let spec = graph();
    println!("{}", spec.render());
    let registry = Registry::builtin();
    let problems = validate(&spec, &registry);
    if !problems.is_empty() {
        return Err(format!("invalid graph: {problems:?}").into());
    }

    let run = Engine::new(registry).execute(&spec, &RunContext::new(dir.path(), 42), 4)?;
    for (id, r) in &run.nodes {
        println!("{id:>14}: {:?} in {:.1} ms", r.status, r.elapsed_ms);
    }
    for node in ["svm-metrics", "tuned-metrics"] {
        let m = &run.payload(node).unwrap().as_metrics().unwrap().metrics;
        println!("{node}: auc {:.3} (p {:.4}), ap {:.3}, accuracy {:.3}", m.auc, m.auc_p_value, m.ap, m.accuracy);
    }

    let store = ExperimentStore::open(dir.path().join("store"))?;
    let record = store.save(&run)?;
    let split = &run.payload("split").unwrap().as_table().unwrap().table;
    let validation = split.subset_rows(&split.rows_in(Split::Validation));
    let again = store.retest(&record, &validation, Some("svm-metrics"))?;
    let stored = &run.payload("svm-metrics").unwrap().as_metrics().unwrap().metrics;
    println!(
        "retest of {record}: auc {:.3}, identical to stored: {}",
        again.result.metrics.auc,
        &again.result.metrics == stored
    );
    Ok(())
}
