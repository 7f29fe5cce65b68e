//! End-to-end acceptance suite. Every check prints one `criterion N` line
//! with its outcome, then fails the test if the check failed.

mod common;
#[path = "../../graph/tests/common/mod.rs"]
mod graph_support;
#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use axum::http::StatusCode;
use common::{dvol_b64, Harness};
use radiowb::{router, Config, Workbench};
use radiowb_analytics::metrics::delong_test;
use radiowb_analytics::search::{
    hyperband_brackets, hyperparameter_search, Config as SearchConfig, Domain, SearchBudget, SearchSpace, Strategy,
};
use radiowb_analytics::{FeatureTable, Split};
use radiowb_core::dvol::{decode, encode, ValueType};
use radiowb_core::radiomics::{glcm, gldm, glrlm, glszm, intensity_blocks, ngtdm, texture::DIRECTIONS};
use radiowb_core::segmentation::{fit_boundary, CancelToken, GrowRequest, Polarity};
use radiowb_core::{
    discretize, extract_feature_vector, extract_from_mask, BinScheme, ExtractionSettings, Mask, RoiPolygon,
    SlicePolygon, Volume,
};
use radiowb_graph::{Edge, Engine, GraphSpec, NodeSpec, Payload, Registry, RunContext, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

/// Runs `body`, prints the outcome line and re-raises a failure.
fn criterion(n: u32, title: &str, body: impl FnOnce() -> String) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let secs = start.elapsed().as_secs_f64();
    let line = match &outcome {
        Ok(detail) => format!("criterion {n:>2}: PASS  {title} [{detail}; {secs:.1}s]"),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            format!("criterion {n:>2}: FAIL  {title} [{}; {secs:.1}s]", msg.lines().next().unwrap_or(""))
        }
    };
    // written straight to the handle so the line shows without --nocapture
    let _ = writeln!(std::io::stderr(), "{line}");
    if let Err(e) = outcome {
        resume_unwind(e);
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

fn square(z: usize, lo: f64, hi: f64) -> SlicePolygon {
    SlicePolygon { z, vertices: vec![[lo, lo], [hi, lo], [hi, hi], [lo, hi]] }
}

// ------------------------------------------------------------ 1

#[test]
fn criterion_01_feature_counts() {
    criterion(1, "feature counts 1223 / 1316, 64^3 ROI under 5 s", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = [72, 72, 68];
        let values: Vec<f64> = (0..dims.iter().product::<usize>()).map(|_| rng.gen_range(-200.0..300.0)).collect();
        let vol = Volume::new(dims, [1.0; 3], [0.0; 3], values, "CT").unwrap();
        // pixel centres 4..=67 in x and y, slices 2..=65
        let roi = RoiPolygon::new("cube", "s", (2..66).map(|z| square(z, 3.5, 67.5)).collect());
        assert_eq!(radiowb_core::rasterize(&roi, &vol).unwrap().voxel_count(), 64 * 64 * 64);

        let start = Instant::now();
        let fv = extract_feature_vector(&vol, &roi, &ExtractionSettings::default()).unwrap();
        let secs = start.elapsed().as_secs_f64();
        assert_eq!(fv.len(), 1223);
        assert_eq!(fv.names.iter().collect::<BTreeSet<_>>().len(), 1223, "feature names are unique");
        assert!(fv.values.iter().all(|v| v.is_finite()));
        assert!(secs < 5.0, "default extraction of a 64^3 ROI took {secs:.2}s");

        let with_log = extract_feature_vector(&vol, &roi, &ExtractionSettings::with_log(&[3.0])).unwrap();
        assert_eq!(with_log.len(), 1316);
        assert_eq!(with_log.names.iter().collect::<BTreeSet<_>>().len(), 1316);
        format!("default {} features in {secs:.2}s, with LoG {}", fv.len(), with_log.len())
    });
}

// ------------------------------------------------------------ 2

fn matrices_agree(seed: u64, disc: &radiowb_core::DiscretizedVolume, grid: &oracle::Grid) {
    let ng = disc.ng();
    for d in DIRECTIONS {
        let c = glcm::cooccurrence_counts(disc, d);
        let sym: Vec<Vec<u64>> = (0..ng).map(|i| (0..ng).map(|j| c[i * ng + j] + c[j * ng + i]).collect()).collect();
        assert_eq!(sym, oracle::glcm_counts(grid, d), "seed {seed}: glcm {d:?}");
        assert_eq!(glrlm::run_length_matrix(disc, d), oracle::glrlm_matrix(grid, d), "seed {seed}: glrlm {d:?}");
    }
    assert_eq!(glszm::size_zone_matrix(disc), oracle::glszm_matrix(grid), "seed {seed}: glszm");
    assert_eq!(gldm::dependence_matrix(disc, 0), oracle::gldm_matrix(grid, 0), "seed {seed}: gldm");
    let m = ngtdm::ngtdm_matrix(disc);
    let (n, s) = oracle::ngtdm(grid);
    assert_eq!(m.n, n, "seed {seed}: ngtdm counts");
    assert_eq!(m.s.len(), s.len());
    for (a, b) in m.s.iter().zip(&s) {
        assert!(oracle::close(*a, *b, 1e-12), "seed {seed}: ngtdm s {a} vs {b}");
    }
}

#[test]
fn criterion_02_oracle_equivalence() {
    criterion(2, "texture matrices and 93 intensity features match oracles on 200 random 8^3 volumes", || {
        let start = Instant::now();
        let mut compared = 0usize;
        for seed in 0..200u64 {
            let (vol, mask, ng) = oracle::random_case(seed, [8, 8, 8], 8);
            let disc = discretize(&vol, &mask, BinScheme::FixedBinCount(ng)).unwrap();
            let grid = oracle::quantize(vol.voxels(), mask.bits(), vol.dims(), ng);
            assert_eq!(disc.levels(), &grid.levels[..], "seed {seed}: levels");
            assert!(disc.ng() <= 8);
            matrices_agree(seed, &disc, &grid);

            let blocks = intensity_blocks(&vol, &mask, &disc, 0);
            let want = [
                oracle::first_order(&vol, &mask, &grid),
                oracle::glcm_features(&grid),
                oracle::gldm_features(&grid, 0),
                oracle::glrlm_features(&grid),
                oracle::glszm_features(&grid),
                oracle::ngtdm_features(&grid),
            ];
            let total: usize = blocks.iter().map(|b| b.values.len()).sum();
            assert_eq!(total, 93, "seed {seed}: intensity feature count");
            assert_eq!(blocks.len(), want.len());
            for (b, w) in blocks.iter().zip(&want) {
                assert_eq!(b.names.len(), w.len(), "seed {seed} {}", b.class);
                for (name, v) in b.names.iter().zip(&b.values) {
                    let o = w.get(name).unwrap_or_else(|| panic!("seed {seed}: oracle lacks {}/{name}", b.class));
                    assert!(oracle::close(*v, *o, 1e-9), "seed {seed} {}/{name}: {v} vs oracle {o}", b.class);
                    compared += 1;
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 120.0, "took {secs:.1}s");
        format!("{compared} feature values compared")
    });
}

// ------------------------------------------------------------ 3

#[test]
fn criterion_03_constant_image() {
    criterion(3, "constant image gives the degenerate per-feature table", || {
        let vol = Volume::from_fn([4, 4, 4], [1.0; 3], |_, _, _| oracle::constant::VALUE).unwrap();
        let settings = ExtractionSettings::default();
        let fv = extract_from_mask(&vol, &Mask::full(vol.dims()), &settings).unwrap();
        let want = oracle::constant::table(&settings.image_types);
        assert_eq!(fv.len(), want.len());
        for ((name, value), (wname, wvalue)) in fv.names.iter().zip(&fv.values).zip(&want) {
            assert_eq!(name, wname);
            assert!(oracle::close(*value, *wvalue, 1e-9), "{name}: {value} vs {wvalue}");
        }

        // gray-level spread is zero everywhere, whatever the image type
        let zero = |n: &str| {
            n.ends_with("firstorder_Entropy")
                || n.ends_with("firstorder_Variance")
                || n.contains("glcm_") && (n.ends_with("Entropy") || n.ends_with("Variance"))
                || n.ends_with("GrayLevelVariance")
                || n.ends_with("_Contrast")
        };
        let one = |n: &str| n.ends_with("MaximumProbability") || n.ends_with("firstorder_Uniformity");
        let mut checked = 0;
        for (name, v) in fv.names.iter().zip(&fv.values) {
            if zero(name) {
                assert_eq!(*v, 0.0, "{name}");
                checked += 1;
            }
            if one(name) {
                assert_eq!(*v, 1.0, "{name}");
                checked += 1;
            }
            if name.ends_with("ngtdm_Coarseness") {
                assert_eq!(*v, 1e6, "{name}");
            }
            if name.ends_with("ngtdm_Busyness")
                || name.ends_with("ngtdm_Complexity")
                || name.ends_with("ngtdm_Strength")
            {
                assert_eq!(*v, 0.0, "{name}");
            }
        }
        assert!(fv.warnings.iter().any(|w| w.contains("Coarseness")));
        format!("{} features, {checked} degenerate values", fv.len())
    });
}

// ------------------------------------------------------------ 4

/// Gaussian blob with noise; class 1 adds a checkerboard texture.
fn lesion(rng: &mut ChaCha8Rng, textured: bool) -> Volume {
    let (cx, cy) = (9.5 + rng.gen_range(-1.5..1.5), 9.5 + rng.gen_range(-1.5..1.5));
    let amp = rng.gen_range(80.0..120.0);
    let width = rng.gen_range(25.0..45.0);
    let base = rng.gen_range(10.0..30.0);
    let dims = [20, 20, 4];
    let mut values = Vec::with_capacity(1600);
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                let noise: f64 = rng.sample(StandardNormal);
                let check = if textured && (x + y + z) % 2 == 0 { 30.0 } else { 0.0 };
                values.push((base + amp * (-r2 / width).exp() + check + 4.0 * noise).round());
            }
        }
    }
    Volume::new(dims, [0.7, 0.7, 2.5], [0.0; 3], values, "CT").unwrap()
}

fn workbench_harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("data")).unwrap();
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    let wb =
        Workbench::open(Config { root: dir.path().join("store"), data_dir: dir.path().join("data"), workers }).unwrap();
    Harness { app: router(wb.clone()), wb, dir }
}

/// Uploads `n` lesions with alternating classes and one ROI each.
async fn lesion_study(h: &Harness, id: &str, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series: Vec<Value> = (0..n)
        .map(|i| json!({"series_id": format!("{id}-s{i:03}"), "dvol": dvol_b64(&lesion(&mut rng, i % 2 == 1))}))
        .collect();
    let (s, b) = h.post("/studies", json!({"study_id": id, "series": series})).await;
    assert_eq!(s, StatusCode::CREATED, "{b}");
    for i in 0..n {
        let slices: Vec<Value> =
            (1..3).map(|z| json!({"z": z, "vertices": [[3.5, 3.5], [15.5, 3.5], [15.5, 15.5], [3.5, 15.5]]})).collect();
        let body = json!({
            "roi_id": format!("{id}-r{i:03}"),
            "series_id": format!("{id}-s{i:03}"),
            "slices": slices,
            "labels": {"texture": if i % 2 == 1 { "checkerboard" } else { "smooth" }},
        });
        let (s, b) = h.post(&format!("/studies/{id}/rois"), body).await;
        assert_eq!(s, StatusCode::ACCEPTED, "{b}");
    }
    for i in 0..n {
        h.features(&format!("{id}-r{i:03}")).await;
    }
}

/// min-max, model-based selection of at most 40 features with a logistic
/// model, SVM grid search with cross-validation, validation metrics.
fn lesion_graph() -> Value {
    json!({
        "version": "1",
        "nodes": [
            {"id": "load", "type": "table-loader", "params": {"path": "features.csv"}},
            {"id": "split", "type": "split", "params": {"fraction": 0.8}},
            {"id": "minmax", "type": "scaler", "params": {"kind": "min-max"}},
            {"id": "select", "type": "select-from-model", "params": {"estimator": {"type": "logistic"}, "max_features": 40}},
            {"id": "svm", "type": "grid-search", "params": {"kind": "svm", "folds": 5}},
            {"id": "metrics", "type": "evaluate", "params": {"permutations": 200}}
        ],
        "edges": [
            ["load", "split", "table"], ["split", "minmax", "table"], ["minmax", "select", "table"],
            ["select", "svm", "table"], ["svm", "metrics", "model"]
        ]
    })
}

fn brute_auc(s: &[f64], y: &[u8]) -> f64 {
    let mut twice = 0u64;
    let (p, n) = (y.iter().filter(|&&l| l == 1).count(), y.iter().filter(|&&l| l == 0).count());
    for i in 0..s.len() {
        for j in 0..s.len() {
            if y[i] == 1 && y[j] == 0 {
                twice += if s[i] > s[j] {
                    2
                } else if s[i] == s[j] {
                    1
                } else {
                    0
                };
            }
        }
    }
    twice as f64 / 2.0 / (p as f64 * n as f64)
}

/// Step-wise average precision over distinct score thresholds.
fn brute_ap(s: &[f64], y: &[u8]) -> f64 {
    let p = y.iter().filter(|&&l| l == 1).count() as f64;
    let mut thresholds: Vec<f64> = s.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let (mut ap, mut prev_recall) = (0.0, 0.0);
    for t in thresholds {
        let tp = s.iter().zip(y).filter(|(v, l)| **v >= t && **l == 1).count() as f64;
        let called = s.iter().filter(|v| **v >= t).count() as f64;
        ap += (tp / p - prev_recall) * tp / called;
        prev_recall = tp / p;
    }
    ap
}

async fn node_payload(h: &Harness, run_id: &str, node: &str) -> Payload {
    let (s, body) = h.get(&format!("/runs/{run_id}/nodes/{node}/output")).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["status"], "ok", "{node}: {body}");
    serde_json::from_value(body["payload"].clone()).unwrap()
}

#[test]
fn criterion_04_lesion_classification() {
    criterion(4, "smooth vs textured lesions: validation AUC and AP >= 0.95 over 5 seeds, under 5 min", || {
        let start = Instant::now();
        let h = workbench_harness();
        let mut lines = Vec::new();
        runtime().block_on(async {
            for seed in 0..5u64 {
                let study = format!("lesions{seed}");
                lesion_study(&h, &study, 200, 100 + seed).await;
                let data = json!({"study": study, "label": "texture", "positive": "checkerboard"});
                let (s, started) = h
                    .post("/runs", json!({"graph": lesion_graph(), "data": data, "seed": seed, "parallelism": 4}))
                    .await;
                assert_eq!(s, StatusCode::ACCEPTED, "{started}");
                let run_id = started["run_id"].as_str().unwrap().to_string();
                let run = h.finished_run(&run_id).await;
                assert_eq!(run["phase"], "finished", "{run}");

                let selected = node_payload(&h, &run_id, "select").await;
                let kept = selected.as_table().unwrap().table.n_cols();
                assert!((1..=40).contains(&kept), "select kept {kept}");
                let metrics = node_payload(&h, &run_id, "metrics").await;
                let m = metrics.as_metrics().unwrap();
                assert_eq!(m.metrics.n, 40, "80/20 split of 200");
                assert_eq!(m.metrics.auc, brute_auc(&m.scores, &m.labels));
                assert!(oracle::close(m.metrics.ap, brute_ap(&m.scores, &m.labels), 1e-12));
                assert!(m.metrics.auc >= 0.95, "seed {seed}: auc {}", m.metrics.auc);
                assert!(m.metrics.ap >= 0.95, "seed {seed}: ap {}", m.metrics.ap);
                lines.push(format!("seed {seed} auc {:.3} ap {:.3}", m.metrics.auc, m.metrics.ap));
            }
        });
        h.wb.shutdown();
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 300.0, "end to end {secs:.1}s");
        lines.join(", ")
    });
}

// ------------------------------------------------------------ 5

struct Dag {
    preds: Vec<Vec<usize>>,
    fail: Vec<bool>,
}

fn random_dag(rng: &mut ChaCha8Rng) -> Dag {
    let n = rng.gen_range(2..16);
    let preds = (0..n)
        .map(|i| {
            let k = rng.gen_range(0..=i.min(3));
            let mut p: Vec<usize> = rand::seq::index::sample(rng, i.max(1), k.min(i)).into_vec();
            p.sort_unstable();
            p
        })
        .collect();
    let fail = (0..n).map(|_| rng.gen_bool(0.2)).collect();
    Dag { preds, fail }
}

fn dag_spec(d: &Dag) -> GraphSpec {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (i, preds) in d.preds.iter().enumerate() {
        let ty = if preds.is_empty() { "test-const" } else { "test-mix" };
        let params = json!({"value": i as f64, "salt": i as f64, "fail": d.fail[i]});
        nodes.push(NodeSpec::new(format!("n{i}"), ty, params));
        for &p in preds {
            edges.push(Edge::new(format!("n{p}"), format!("n{i}"), "in"));
        }
    }
    GraphSpec::new(nodes, edges)
}

/// Descendants of the failing nodes, by repeated closure over edges.
fn descendant_closure(d: &Dag, errored: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut closure = BTreeSet::new();
    loop {
        let before = closure.len();
        for (i, preds) in d.preds.iter().enumerate() {
            if preds.iter().any(|p| errored.contains(p) || closure.contains(p)) {
                closure.insert(i);
            }
        }
        if closure.len() == before {
            return closure;
        }
    }
}

#[test]
fn criterion_05_error_isolation() {
    criterion(5, "fault-injected DAGs: skipped = descendant closure, identical digests at parallelism 1 and 8", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut errors, mut skips) = (0, 0);
        for case in 0..100 {
            let d = random_dag(&mut rng);
            let spec = dag_spec(&d);
            let mut digests = Vec::new();
            for parallelism in [1, 8] {
                let run = Engine::new(graph_support::test_registry())
                    .execute(&spec, &RunContext::new(".", 0), parallelism)
                    .unwrap();
                let with = |st: Status| -> BTreeSet<usize> {
                    (0..d.preds.len()).filter(|i| run.status(&format!("n{i}")) == Some(st)).collect()
                };
                let errored = with(Status::Error);
                let skipped = with(Status::SkippedUpstream);
                let ok = with(Status::Ok);
                assert_eq!(skipped, descendant_closure(&d, &errored), "case {case}");
                let failing: BTreeSet<usize> = (0..d.preds.len()).filter(|&i| d.fail[i]).collect();
                assert!(errored.is_subset(&failing), "case {case}");
                assert!(failing.difference(&errored).all(|i| skipped.contains(i)), "case {case}");
                assert_eq!(
                    ok.len() + errored.len() + skipped.len(),
                    d.preds.len(),
                    "case {case}: every node completes"
                );
                // untouched nodes carry the sum of their ancestors' contributions
                let mut value: BTreeMap<usize, f64> = BTreeMap::new();
                for i in 0..d.preds.len() {
                    if ok.contains(&i) {
                        value.insert(i, i as f64 + d.preds[i].iter().map(|p| value[p]).sum::<f64>());
                        let got = run.payload(&format!("n{i}")).unwrap().as_table().unwrap().table.values[0][0];
                        assert_eq!(got, value[&i], "case {case}: n{i}");
                    }
                }
                if parallelism == 1 {
                    errors += errored.len();
                    skips += skipped.len();
                }
                digests.push(run.nodes.iter().map(|(k, r)| (k.clone(), r.digest.clone())).collect::<Vec<_>>());
            }
            assert_eq!(digests[0], digests[1], "case {case}");
        }
        assert!(errors > 0 && skips > 0, "the generator must inject faults");
        format!("100 graphs, {errors} errors, {skips} skipped")
    });
}

// ------------------------------------------------------------ 6

#[test]
fn criterion_06_delong_calibration() {
    criterion(6, "DeLong null rejection rate at 5% in [0.01, 0.10], AUC equals pair counting", || {
        let mut rejections = 0;
        for trial in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(6000 + trial);
            let s: Vec<f64> = (0..200).map(|_| rng.gen()).collect();
            let y: Vec<u8> = (0..200).map(|_| rng.gen_range(0..2)).collect();
            let d = delong_test(&s, &y).unwrap();
            assert_eq!(d.auc, brute_auc(&s, &y), "trial {trial}");
            if d.p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / 200.0;
        assert!((0.01..=0.10).contains(&rate), "rejection rate {rate}");
        format!("rejection rate {rate:.3}")
    });
}

// ------------------------------------------------------------ 7

/// Bracket sizes computed directly from their definition.
fn derived_schedule(r: u64, eta: u64) -> Vec<(u32, u64, u64)> {
    let mut s_max = 0u32;
    while eta.pow(s_max + 1) <= r {
        s_max += 1;
    }
    (0..=s_max)
        .rev()
        .map(|s| {
            let n = ((s_max as u64 + 1) * eta.pow(s)).div_ceil(s as u64 + 1);
            (s, n, r / eta.pow(s))
        })
        .collect()
}

fn rung_sum(n: u64, r: u64, s: u32, eta: u64) -> u64 {
    (0..=s).map(|i| (n / eta.pow(i)) * r * eta.pow(i)).sum()
}

#[test]
fn criterion_07_hyperband_accounting() {
    criterion(7, "hyperband (81, 3) runs the derived bracket table within the schedule sum", || {
        let derived = derived_schedule(81, 3);
        assert_eq!(derived, vec![(4, 81, 1), (3, 34, 3), (2, 15, 9), (1, 8, 27), (0, 5, 81)]);
        let table: Vec<(u32, u64, u64)> = hyperband_brackets(81, 3).iter().map(|b| (b.s, b.n, b.r)).collect();
        assert_eq!(table, derived);
        let schedule_sum: u64 = derived.iter().map(|&(s, n, r)| rung_sum(n, r, s, 3)).sum();

        let mut domains = BTreeMap::new();
        domains.insert("c".into(), Domain::LogUniform { low: 1e-3, high: 1e3 });
        domains.insert("depth".into(), Domain::IntRange { low: 1, high: 8 });
        let space = SearchSpace { domains, queue: Vec::new() };
        let objective = |c: &SearchConfig, r: u64| Ok(-c["c"].ln().abs() - 1.0 / r as f64);
        let budget = |total| SearchBudget {
            strategy: Strategy::Hyperband,
            max_resource: 81,
            eta: 3,
            total_budget: total,
            seed: 7,
        };

        let full = hyperparameter_search(objective, &space, &budget(1_000_000)).unwrap();
        for &(s, n, r) in &derived {
            let first: Vec<_> = full.trials.iter().filter(|t| t.bracket == Some(s) && t.rung == Some(0)).collect();
            assert_eq!(first.len() as u64, n, "bracket {s}");
            assert!(first.iter().all(|t| t.resource == r), "bracket {s}");
        }
        let logged: u64 = full.trials.iter().map(|t| t.resource).sum();
        assert_eq!(logged, full.consumed);
        assert!(full.consumed <= schedule_sum);

        for total in [100, 500, 2000] {
            let tight = hyperparameter_search(objective, &space, &budget(total)).unwrap();
            assert!(tight.consumed <= total.min(schedule_sum), "budget {total}: consumed {}", tight.consumed);
        }
        format!("consumed {} of schedule sum {schedule_sum}", full.consumed)
    });
}

// ------------------------------------------------------------ 8

fn dice(a: &Mask, b: &Mask) -> f64 {
    let both = a.bits().iter().zip(b.bits()).filter(|(x, y)| **x && **y).count();
    let total = a.bits().iter().filter(|x| **x).count() + b.bits().iter().filter(|x| **x).count();
    2.0 * both as f64 / total as f64
}

fn occupied(m: &Mask) -> BTreeSet<usize> {
    let [nx, ny, _] = m.dims();
    m.bits().iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i / (nx * ny)).collect()
}

#[test]
fn criterion_08_region_growing() {
    criterion(8, "region growing recovers disk and sphere phantoms with Dice >= 0.95", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let disk_truth = |x: usize, y: usize| (x as f64 - 24.0).powi(2) + (y as f64 - 22.0).powi(2) <= 100.0;
        let disk = Volume::from_fn([48, 48, 1], [1.0; 3], |x, y, _| {
            let n: f64 = rng.sample(StandardNormal);
            let level = if disk_truth(x, y) { 150.0 } else { 20.0 };
            level + 3.0 * n
        })
        .unwrap();
        let curve = |z, lo, hi| RoiPolygon::new("curve", "s", vec![square(z, lo, hi)]);
        let grown =
            fit_boundary(&disk, &GrowRequest::new(curve(0, 9.5, 38.5), Polarity::Bright), &CancelToken::new()).unwrap();
        let truth = Mask::from_fn(disk.dims(), |x, y, _| disk_truth(x, y));
        let d_disk = dice(&grown.mask, &truth);
        assert!(d_disk >= 0.95, "disk dice {d_disk}");

        let sphere_truth = |x: usize, y: usize, z: usize| {
            (x as f64 - 20.0).powi(2) + (y as f64 - 19.0).powi(2) + ((z as f64 - 5.0) * 2.0).powi(2) <= 81.0
        };
        let sphere = Volume::from_fn([40, 40, 11], [1.0, 1.0, 2.0], |x, y, z| {
            let n: f64 = rng.sample(StandardNormal);
            let level = if sphere_truth(x, y, z) { 120.0 } else { 10.0 };
            level + 3.0 * n
        })
        .unwrap();
        let truth = Mask::from_fn(sphere.dims(), sphere_truth);
        let mut req = GrowRequest::new(curve(5, 8.5, 31.5), Polarity::Bright);
        req.spread_3d = true;
        let grown = fit_boundary(&sphere, &req, &CancelToken::new()).unwrap();
        let d_sphere = dice(&grown.mask, &truth);
        assert!(d_sphere >= 0.95, "sphere dice {d_sphere}");
        assert!(occupied(&grown.mask).len() > 1);

        req.spread_3d = false;
        let flat = fit_boundary(&sphere, &req, &CancelToken::new()).unwrap();
        assert_eq!(occupied(&flat.mask), BTreeSet::from([5]));
        format!("disk {d_disk:.3}, sphere {d_sphere:.3} over {} slices", occupied(&grown.mask).len())
    });
}

// ------------------------------------------------------------ 9

#[test]
fn criterion_09_persistence_and_formats() {
    criterion(9, "retest reproduces stored metrics bit for bit; graph and volume formats round-trip", || {
        let h = workbench_harness();
        let (record, rebuilt) = runtime().block_on(async {
            lesion_study(&h, "persist", 60, 9).await;
            let data = json!({"study": "persist", "label": "texture", "positive": "checkerboard"});
            let (s, started) = h.post("/runs", json!({"graph": lesion_graph(), "data": data, "seed": 3})).await;
            assert_eq!(s, StatusCode::ACCEPTED, "{started}");
            let run_id = started["run_id"].as_str().unwrap().to_string();
            let run = h.finished_run(&run_id).await;
            let record = run["record_id"].as_str().unwrap().to_string();

            // validation rows of the exported table, reloaded from disk
            let split = node_payload(&h, &run_id, "split").await;
            let split = &split.as_table().unwrap().table;
            let validation = split.rows_in(Split::Validation);
            let run_dir = h.dir.path().join("store/runs").join(&run_id);
            let exported =
                FeatureTable::from_csv(&std::fs::read_to_string(run_dir.join("features.csv")).unwrap()).unwrap();
            let ids: BTreeSet<&String> = validation.iter().map(|&i| &split.row_ids[i]).collect();
            let rows: Vec<usize> = (0..exported.n_rows()).filter(|&i| ids.contains(&exported.row_ids[i])).collect();
            let csv = exported.subset_rows(&rows).to_csv();

            let (s, retest) = h.post(&format!("/experiments/{record}/retest"), json!({"table": csv})).await;
            assert_eq!(s, StatusCode::OK, "{retest}");
            let stored = node_payload(&h, &run_id, "metrics").await;
            let stored = stored.as_metrics().unwrap();
            let re: radiowb_graph::payload::MetricsPayload = serde_json::from_value(retest["result"].clone()).unwrap();
            assert_eq!(
                re.scores.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                stored.scores.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            assert_eq!(re.metrics, stored.metrics);
            assert_eq!(serde_json::to_string(&re.metrics).unwrap(), serde_json::to_string(&stored.metrics).unwrap());

            // the record survives a restart and still retests identically
            let (_, app) = h.reopen();
            let (s, again) = common::call(
                &app,
                axum::http::Method::POST,
                &format!("/experiments/{record}/retest"),
                Some(json!({"table": csv})),
            )
            .await;
            assert_eq!(s, StatusCode::OK);
            (record, again == retest)
        });
        assert!(rebuilt, "retest after restart differs");

        // graph documents
        let spec = GraphSpec::parse(&lesion_graph().to_string()).unwrap();
        let text = spec.render();
        assert_eq!(GraphSpec::parse(&text).unwrap(), spec);
        assert_eq!(GraphSpec::parse(&text).unwrap().render(), text);

        // volumes, every sample type
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ints: Vec<f64> = (0..5 * 4 * 3).map(|_| rng.gen_range(-1024..3000) as f64).collect();
        let floats: Vec<f64> = (0..5 * 4 * 3).map(|_| (rng.gen::<f32>() * 1e3) as f64).collect();
        let doubles: Vec<f64> = (0..5 * 4 * 3).map(|_| rng.sample::<f64, _>(StandardNormal) / 3.0).collect();
        for (values, ty) in [(ints, ValueType::Int16), (floats, ValueType::Float32), (doubles, ValueType::Float64)] {
            let vol = Volume::new([5, 4, 3], [0.7, 0.8, 2.5], [-10.0, 3.25, 0.5], values, "CT").unwrap();
            assert_eq!(ValueType::narrowest_for(vol.voxels()), ty);
            let back = decode(&encode(&vol, ty)[..]).unwrap();
            assert_eq!(back, vol, "{ty:?}");
            assert!(back.voxels().iter().zip(vol.voxels()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
        format!("record {record}, graph and 3 volume types round-trip")
    });
}

// ------------------------------------------------------------ 10

fn run_table_graph(spec: &GraphSpec, table: &FeatureTable) -> radiowb_graph::RunRecord {
    let dir = tempfile::tempdir().unwrap();
    graph_support::write_table(dir.path(), "cohort.csv", table);
    let registry = Registry::builtin();
    assert_eq!(radiowb_graph::validate(spec, &registry), vec![]);
    let run = Engine::new(registry).execute(spec, &RunContext::new(dir.path(), 10), 4).unwrap();
    for (id, r) in &run.nodes {
        assert_eq!(r.status, Status::Ok, "{id}: {:?}", r.error);
    }
    run
}

#[test]
fn criterion_10_case_study_graphs() {
    criterion(10, "ANOVA-100 / weight-pick-4 and KBest / RFE-LASSO-6 / SVM graphs validate and execute", || {
        let n = |id: &str, ty: &str, p: Value| NodeSpec::new(id, ty, p);
        let anova = GraphSpec::new(
            vec![
                n("load", "table-loader", json!({"path": "cohort.csv"})),
                n("split", "split", json!({"fraction": 0.7})),
                n("anova", "select-k-best", json!({"k": {"k": 100}, "score": "anova-f"})),
                n("logistic", "train-model", json!({"kind": "logistic-regression"})),
                n("linear-svm", "train-model", json!({"kind": "svm", "kernel": "linear"})),
                n("pick", "weight-pick", json!({"k": 4})),
                n("svm", "train-model", json!({"kind": "svm", "kernel": "rbf"})),
                n("metrics", "evaluate", json!({"permutations": 100})),
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
        let run = run_table_graph(&anova, &graph_support::synthetic(120, 150, 4, 1.5, 12));
        assert_eq!(run.payload("anova").unwrap().as_table().unwrap().table.n_cols(), 100);
        assert_eq!(run.payload("pick").unwrap().as_table().unwrap().table.n_cols(), 4);
        let auc_a = run.payload("metrics").unwrap().as_metrics().unwrap().metrics.auc;

        let chain = ["load", "split", "scale", "kbest", "rfe", "svm", "metrics"];
        let rfe = GraphSpec::new(
            vec![
                n("load", "table-loader", json!({"path": "cohort.csv"})),
                n("split", "split", json!({})),
                n("scale", "scaler", json!({"kind": "min-max"})),
                n("kbest", "select-k-best", json!({"k": {"k": 20}, "score": "anova-f"})),
                n("rfe", "rfe", json!({"estimator": {"type": "lasso"}, "n_target": 6})),
                n("svm", "train-model", json!({"kind": "svm", "kernel": "linear"})),
                n("metrics", "evaluate", json!({"permutations": 100})),
            ],
            chain
                .windows(2)
                .map(|w| Edge::new(w[0], w[1], if w[1] == "metrics" { "model" } else { "table" }))
                .collect(),
        );
        let run = run_table_graph(&rfe, &graph_support::synthetic(100, 40, 6, 1.2, 13));
        assert_eq!(run.payload("kbest").unwrap().as_table().unwrap().table.n_cols(), 20);
        assert_eq!(run.payload("rfe").unwrap().as_table().unwrap().table.n_cols(), 6);
        let auc_b = run.payload("metrics").unwrap().as_metrics().unwrap().metrics.auc;
        format!("validation auc {auc_a:.3} and {auc_b:.3}")
    });
}
