mod common;

use common::{synthetic, write_table};
use radiowb_core::dvol::write_volume;
use radiowb_core::{RoiPolygon, Volume};
use radiowb_graph::payload::{PlotPayload, RoiItem, RoiSet};
use radiowb_graph::{validate, Edge, Engine, GraphSpec, NodeSpec, Payload, Registry, RunContext, Status};
use serde_json::json;

fn node(id: &str, ty: &str, params: serde_json::Value) -> NodeSpec {
    NodeSpec::new(id, ty, params)
}

fn chain(ids: &[&str]) -> Vec<Edge> {
    ids.windows(2)
        .map(|w| {
            let port = if w[1] == "metrics" { "model" } else { "table" };
            Edge::new(w[0], w[1], port)
        })
        .collect()
}

fn run_ok(spec: &GraphSpec, dir: &std::path::Path) -> radiowb_graph::RunRecord {
    let registry = Registry::builtin();
    assert_eq!(validate(spec, &registry), vec![]);
    let run = Engine::new(registry).execute(spec, &RunContext::new(dir, 7), 4).unwrap();
    for (id, r) in &run.nodes {
        assert_eq!(r.status, Status::Ok, "{id}: {:?}", r.error);
    }
    run
}

#[test]
fn logistic_selection_then_svm_grid_search() {
    let dir = tempfile::tempdir().unwrap();
    write_table(dir.path(), "lung.csv", &synthetic(100, 60, 5, 1.2, 11));
    let spec = GraphSpec::new(
        vec![
            node("load", "table-loader", json!({"path": "lung.csv"})),
            node("split", "split", json!({"fraction": 0.8})),
            node("scale", "scaler", json!({"kind": "min-max"})),
            node("select", "select-from-model", json!({"estimator": {"type": "l1-logistic"}, "max_features": 40})),
            node("svm", "grid-search", json!({"kind": "svm", "folds": 5})),
            node("metrics", "evaluate", json!({"permutations": 200})),
        ],
        chain(&["load", "split", "scale", "select", "svm", "metrics"]),
    );
    let run = run_ok(&spec, dir.path());
    let sel = run.payload("select").unwrap().as_table().unwrap();
    assert!(sel.table.n_cols() <= 40 && sel.table.n_cols() >= 1);
    assert!(!sel.selection.as_ref().unwrap().path.is_empty());
    let model = run.payload("svm").unwrap().as_model().unwrap();
    assert_eq!(model.cv.as_ref().unwrap().grid.len(), 12);
    assert_eq!(model.model.preprocessing.len(), 2);
    let m = run.payload("metrics").unwrap().as_metrics().unwrap();
    assert_eq!(m.metrics.n, 20);
    assert!(m.metrics.auc > 0.8, "auc {}", m.metrics.auc);
}

#[test]
fn anova_then_weight_pick_of_four() {
    let dir = tempfile::tempdir().unwrap();
    write_table(dir.path(), "glioma.csv", &synthetic(120, 150, 4, 1.5, 12));
    let spec = GraphSpec::new(
        vec![
            node("load", "table-loader", json!({"path": "glioma.csv"})),
            node("split", "split", json!({"fraction": 0.7, "seed": 1})),
            node("anova", "select-k-best", json!({"k": {"k": 100}, "score": "anova-f"})),
            node("logistic", "train-model", json!({"kind": "logistic-regression", "c": 1.0})),
            node("linear-svm", "train-model", json!({"kind": "svm", "kernel": "linear"})),
            node("pick", "weight-pick", json!({"k": 4})),
            node("svm", "train-model", json!({"kind": "svm", "kernel": "rbf"})),
            node("metrics", "evaluate", json!({"permutations": 200})),
        ],
        vec![
            Edge::new("load", "split", "table"),
            Edge::new("split", "anova", "table"),
            Edge::new("anova", "logistic", "table"),
            Edge::new("anova", "linear-svm", "table"),
            Edge::new("logistic", "pick", "models"),
            Edge::new("linear-svm", "pick", "models"),
            Edge::new("anova", "pick", "table"),
            Edge::new("pick", "svm", "table"),
            Edge::new("svm", "metrics", "model"),
        ],
    );
    let run = run_ok(&spec, dir.path());
    assert_eq!(run.payload("anova").unwrap().as_table().unwrap().table.n_cols(), 100);
    let picked = run.payload("pick").unwrap().as_table().unwrap();
    assert_eq!(picked.table.n_cols(), 4);
    // the informative columns carry the largest weights
    let informative = picked.table.columns.iter().filter(|c| ["f000", "f001", "f002", "f003"].contains(&c.as_str()));
    assert!(informative.count() >= 3, "{:?}", picked.table.columns);
    let m = run.payload("metrics").unwrap().as_metrics().unwrap();
    assert_eq!(m.metrics.n, 36);
    assert!(m.metrics.auc > 0.8);
}

#[test]
fn kbest_then_lasso_rfe_to_six() {
    let dir = tempfile::tempdir().unwrap();
    write_table(dir.path(), "breast.csv", &synthetic(100, 40, 6, 1.2, 13));
    let spec = GraphSpec::new(
        vec![
            node("load", "table-loader", json!({"path": "breast.csv"})),
            node("split", "split", json!({})),
            node("scale", "scaler", json!({"kind": "min-max"})),
            node("kbest", "select-k-best", json!({"k": {"k": 20}, "score": "anova-f"})),
            node("rfe", "rfe", json!({"estimator": {"type": "lasso"}, "n_target": 6})),
            node("svm", "train-model", json!({"kind": "svm", "kernel": "linear"})),
            node("metrics", "evaluate", json!({"permutations": 200})),
            node("heatmap", "heatmap", json!({})),
        ],
        {
            let mut e = chain(&["load", "split", "scale", "kbest", "rfe", "svm", "metrics"]);
            e.push(Edge::new("rfe", "heatmap", "table"));
            e
        },
    );
    let run = run_ok(&spec, dir.path());
    let rfe = run.payload("rfe").unwrap().as_table().unwrap();
    assert_eq!(rfe.table.n_cols(), 6);
    assert_eq!(rfe.selection.as_ref().unwrap().elimination_order.len(), 14);
    let Some(Payload::Plot(PlotPayload::Heatmap { order, columns, .. })) = run.payload("heatmap") else {
        panic!("heatmap payload")
    };
    assert_eq!(columns.len(), 6);
    assert_eq!(order.row_order.len(), 100);
    let mut sorted = order.col_order.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    assert!(run.payload("metrics").unwrap().as_metrics().unwrap().metrics.auc > 0.75);
}

#[test]
fn ensemble_search_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    write_table(dir.path(), "t.csv", &synthetic(90, 10, 3, 1.5, 14));
    let spec = GraphSpec::new(
        vec![
            node("load", "table-loader", json!({"path": "t.csv"})),
            node("split", "split", json!({"fraction": 0.7})),
            node("scale", "scaler", json!({"kind": "standard"})),
            node("log", "custom-transform", json!({"expression": "log(x + 100)"})),
            node("tree", "train-model", json!({"kind": "decision-tree", "max_depth": 3})),
            node("forest", "train-model", json!({"kind": "random-forest", "n_trees": 20, "seed": 2})),
            node(
                "hb",
                "hyperparameter-search",
                json!({
                    "kind": "logistic-regression",
                    "space": {"domains": {"c": {"type": "log-uniform", "low": 0.01, "high": 100.0}}},
                    "budget": {"strategy": "hyperband", "max_resource": 9, "total_budget": 200, "seed": 5}
                }),
            ),
            node("vote", "ensemble", json!({"mode": "voting", "permutations": 100})),
            node("hb-metrics", "evaluate", json!({"permutations": 100})),
            node("tsne", "tsne", json!({"perplexity": 10, "iterations": 300})),
            node("kmeans", "kmeans", json!({"k": 2})),
            node("external", "evaluate", json!({"permutations": 100})),
        ],
        vec![
            Edge::new("load", "split", "table"),
            Edge::new("split", "scale", "table"),
            Edge::new("scale", "log", "table"),
            Edge::new("log", "tree", "table"),
            Edge::new("log", "forest", "table"),
            Edge::new("log", "hb", "table"),
            Edge::new("tree", "vote", "models"),
            Edge::new("forest", "vote", "models"),
            Edge::new("hb", "vote", "models"),
            Edge::new("hb", "hb-metrics", "model"),
            Edge::new("log", "tsne", "table"),
            Edge::new("log", "kmeans", "table"),
            // a raw split table: the model's scaler and transform are replayed on it
            Edge::new("hb", "external", "model"),
            Edge::new("split", "external", "table"),
        ],
    );
    let run = run_ok(&spec, dir.path());
    let hb = run.payload("hb").unwrap().as_model().unwrap();
    let outcome = hb.search.as_ref().unwrap();
    assert_eq!(outcome.brackets.len(), 3);
    assert!(outcome.consumed <= 200);
    let vote = run.payload("vote").unwrap().as_metrics().unwrap();
    assert_eq!(vote.metrics.n, 27);
    assert!(vote.scores.iter().all(|s| [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0].iter().any(|v| (s - v).abs() < 1e-12)));
    let a = run.payload("hb-metrics").unwrap().as_metrics().unwrap();
    let b = run.payload("external").unwrap().as_metrics().unwrap();
    assert_eq!(a.scores, b.scores);
    assert_eq!(a.metrics, b.metrics);
    let Some(Payload::Plot(PlotPayload::Tsne { embedding, .. })) = run.payload("tsne") else { panic!() };
    assert_eq!(embedding.coords.len(), 90);
    let Some(Payload::Plot(PlotPayload::Kmeans { clusters, .. })) = run.payload("kmeans") else { panic!() };
    assert_eq!(clusters.assignments.len(), 90);
}

#[test]
fn evaluate_rejects_a_table_from_another_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    write_table(dir.path(), "t.csv", &synthetic(60, 6, 2, 1.5, 15));
    let spec = GraphSpec::new(
        vec![
            node("load", "table-loader", json!({"path": "t.csv"})),
            node("split", "split", json!({})),
            node("a", "scaler", json!({"kind": "min-max"})),
            node("b", "scaler", json!({"kind": "standard"})),
            node("model", "train-model", json!({"kind": "logistic-regression"})),
            node("metrics", "evaluate", json!({})),
        ],
        vec![
            Edge::new("load", "split", "table"),
            Edge::new("split", "a", "table"),
            Edge::new("split", "b", "table"),
            Edge::new("a", "model", "table"),
            Edge::new("model", "metrics", "model"),
            Edge::new("b", "metrics", "table"),
        ],
    );
    let run = Engine::new(Registry::builtin()).execute(&spec, &RunContext::new(dir.path(), 0), 2).unwrap();
    assert_eq!(run.status("metrics"), Some(Status::Error));
    assert!(run.nodes["metrics"].error.as_ref().unwrap().contains("prefix"));
}

/// Smooth blobs versus checkerboard-textured blobs on tiny volumes.
fn image_study(dir: &std::path::Path, n: usize) -> RoiSet {
    std::fs::create_dir_all(dir.join("vol")).unwrap();
    std::fs::create_dir_all(dir.join("roi")).unwrap();
    let mut items = Vec::new();
    for i in 0..n {
        let label = (i % 2) as u8;
        let vol = Volume::from_fn([16, 16, 3], [1.0; 3], |x, y, z| {
            let r2 = (x as f64 - 7.5).powi(2) + (y as f64 - 7.5).powi(2);
            let base = 100.0 * (-r2 / 40.0).exp() + i as f64;
            if label == 1 && (x + y + z) % 2 == 0 {
                base + 40.0
            } else {
                base
            }
        })
        .unwrap();
        let roi = RoiPolygon::on_slice(
            format!("roi{i}"),
            format!("s{i}"),
            1,
            vec![[3.0, 3.0], [12.0, 3.0], [12.0, 12.0], [3.0, 12.0]],
        );
        write_volume(&vol, dir.join(format!("vol/{i}.dvol"))).unwrap();
        std::fs::write(dir.join(format!("roi/{i}.json")), roi.to_json()).unwrap();
        items.push(RoiItem {
            roi_id: format!("roi{i}"),
            volume: format!("vol/{i}.dvol"),
            roi: format!("roi/{i}.json"),
            label: Some(label),
            split: radiowb_analytics::Split::Unassigned,
        });
    }
    let set = RoiSet { items };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string(&set).unwrap()).unwrap();
    set
}

#[test]
fn images_to_features_to_model() {
    let dir = tempfile::tempdir().unwrap();
    image_study(dir.path(), 12);
    let spec = GraphSpec::new(
        vec![
            node("images", "image-loader", json!({"manifest": "manifest.json"})),
            node("features", "extract-features", json!({})),
            node("split", "split", json!({"fraction": 0.5})),
            node("var", "variance-threshold", json!({"threshold": 1e-9})),
            node("scale", "scaler", json!({"kind": "standard"})),
            node("model", "train-model", json!({"kind": "logistic-regression"})),
            node("metrics", "evaluate", json!({"permutations": 50})),
        ],
        vec![
            Edge::new("images", "features", "rois"),
            Edge::new("features", "split", "table"),
            Edge::new("split", "var", "table"),
            Edge::new("var", "scale", "table"),
            Edge::new("scale", "model", "table"),
            Edge::new("model", "metrics", "model"),
        ],
    );
    let run = run_ok(&spec, dir.path());
    let features = run.payload("features").unwrap().as_table().unwrap();
    assert_eq!(features.table.n_cols(), 1223);
    assert_eq!(features.table.n_rows(), 12);
    assert_eq!(run.payload("metrics").unwrap().as_metrics().unwrap().metrics.auc, 1.0);

    // touching one roi file changes the loader digest and everything downstream
    let before = run.nodes["features"].cache_key.clone();
    let mut roi = RoiPolygon::from_json(&std::fs::read_to_string(dir.path().join("roi/0.json")).unwrap()).unwrap();
    roi.slices[0].vertices[0] = [2.0, 3.0];
    std::fs::write(dir.path().join("roi/0.json"), roi.to_json()).unwrap();
    let again = Engine::new(Registry::builtin()).execute(&spec, &RunContext::new(dir.path(), 7), 4).unwrap();
    assert_ne!(again.nodes["features"].cache_key, before);
}
