//! A client session against the HTTP service, driven in-process: upload a
//! study, draw ROIs, wait for features, run a graph over the study and
//! fetch its metrics.
//!
//! `radiowb serve` exposes the same routes on a socket.

use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use base64::Engine as _;
use http_body_util::BodyExt;
use radiowb::{router, Config, Workbench};
use radiowb_core::dvol::{encode, ValueType};
use radiowb_core::Volume;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(path).header("content-type", "application/json");
    let body = body.map_or_else(Body::empty, |b| Body::from(b.to_string()));
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn lesion(i: usize) -> Volume {
    Volume::from_fn([20, 20, 3], [0.8, 0.8, 3.0], |x, y, z| {
        let r2 = (x as f64 - 9.5).powi(2) + (y as f64 - 9.5).powi(2);
        let grain = if i % 2 == 1 && (x + y + z) % 2 == 0 { 25.0 } else { 0.0 };
        (20.0 + 90.0 * (-r2 / 30.0).exp() + grain + ((x * 5 + y * 3 + i) % 7) as f64).round()
    })
    .unwrap()
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let wb = Workbench::open(Config { root: dir.path().join("store"), data_dir: dir.path().into(), workers: 2 })?;
    let app = router(wb.clone());

    let n = 24;
    let series: Vec<Value> = (0..n)
        .map(|i| {
            let bytes = encode(&lesion(i), ValueType::Int16);
            json!({"series_id": format!("s{i}"), "dvol": base64::engine::general_purpose::STANDARD.encode(bytes)})
        })
        .collect();
    let (status, _) = call(&app, Method::POST, "/studies", Some(json!({"study_id": "demo", "series": series}))).await;
    println!("POST /studies -> {status}");

    for i in 0..n {
        let body = json!({
            "roi_id": format!("r{i}"),
            "series_id": format!("s{i}"),
            "slices": [{"z": 1, "vertices": [[4.5, 4.5], [14.5, 4.5], [14.5, 14.5], [4.5, 14.5]]}],
            "labels": {"grade": if i % 2 == 1 { "high" } else { "low" }},
        });
        call(&app, Method::POST, "/studies/demo/rois", Some(body)).await;
    }
    for i in 0..n {
        while call(&app, Method::GET, &format!("/rois/r{i}/features"), None).await.0 == StatusCode::ACCEPTED {
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }
    println!("features ready for {n} ROIs");

    let graph = json!({
        "version": "1",
        "nodes": [
            {"id": "load", "type": "table-loader", "params": {"path": "features.csv"}},
            {"id": "split", "type": "split", "params": {"fraction": 0.75}},
            {"id": "scale", "type": "scaler", "params": {"kind": "standard"}},
            {"id": "kbest", "type": "select-k-best", "params": {"k": {"k": 10}, "score": "anova-f"}},
            {"id": "model", "type": "train-model", "params": {"kind": "logistic-regression"}},
            {"id": "metrics", "type": "evaluate", "params": {"permutations": 200}}
        ],
        "edges": [["load", "split", "table"], ["split", "scale", "table"], ["scale", "kbest", "table"],
                  ["kbest", "model", "table"], ["model", "metrics", "model"]]
    });
    let data = json!({"study": "demo", "label": "grade", "positive": "high"});
    let (status, run) = call(&app, Method::POST, "/runs", Some(json!({"graph": graph, "data": data, "seed": 1}))).await;
    println!("POST /runs -> {status}");
    let run_id = run["run_id"].as_str().unwrap_or_default().to_string();
    loop {
        let (_, view) = call(&app, Method::GET, &format!("/runs/{run_id}"), None).await;
        if view["phase"] != "running" {
            println!("run {run_id}: {}", view["phase"]);
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    let (_, out) = call(&app, Method::GET, &format!("/runs/{run_id}/nodes/metrics/output"), None).await;
    let m = &out["payload"]["metrics"];
    println!("validation auc {} ap {} on {} rows", m["auc"], m["ap"], m["n"]);

    let (_, history) = call(&app, Method::GET, "/experiments", None).await;
    println!("{} saved experiment(s)", history.as_array().map_or(0, Vec::len));
    wb.shutdown();
    Ok(())
}
