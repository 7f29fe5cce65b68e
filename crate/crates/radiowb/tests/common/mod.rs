#![allow(dead_code)]

use std::sync::Arc;
use std::time::{Duration, Instant};

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

pub struct Harness {
    pub dir: tempfile::TempDir,
    pub wb: Arc<Workbench>,
    pub app: Router,
}

impl Harness {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("data")).unwrap();
        let wb = open(dir.path());
        Self { app: router(wb.clone()), wb, dir }
    }

    /// A second workbench over the same stores, as after a restart.
    pub fn reopen(&self) -> (Arc<Workbench>, Router) {
        self.wb.shutdown();
        let wb = open(self.dir.path());
        (wb.clone(), router(wb))
    }

    pub fn data(&self) -> std::path::PathBuf {
        self.dir.path().join("data")
    }

    pub async fn call(&self, method: Method, path: &str, body: Option<Value>) -> (StatusCode, Value) {
        call(&self.app, method, path, body).await
    }

    pub async fn get(&self, path: &str) -> (StatusCode, Value) {
        self.call(Method::GET, path, None).await
    }

    pub async fn post(&self, path: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, path, Some(body)).await
    }

    /// Polls the feature endpoint until extraction finishes.
    pub async fn features(&self, roi: &str) -> Value {
        let deadline = Instant::now() + Duration::from_secs(120);
        loop {
            let (status, body) = self.get(&format!("/rois/{roi}/features")).await;
            match status {
                StatusCode::OK => return body,
                StatusCode::ACCEPTED if Instant::now() < deadline => {
                    tokio::time::sleep(Duration::from_millis(20)).await
                }
                _ => panic!("features of {roi}: {status} {body}"),
            }
        }
    }

    /// Polls a run until it leaves the running phase.
    pub async fn finished_run(&self, run_id: &str) -> Value {
        let deadline = Instant::now() + Duration::from_secs(300);
        loop {
            let (status, body) = self.get(&format!("/runs/{run_id}")).await;
            assert_eq!(status, StatusCode::OK, "{body}");
            if body["phase"] != "running" {
                return body;
            }
            assert!(Instant::now() < deadline, "run {run_id} did not finish");
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }
}

fn open(root: &std::path::Path) -> Arc<Workbench> {
    Workbench::open(Config { root: root.join("store"), data_dir: root.join("data"), workers: 2 }).unwrap()
}

pub async fn call(app: &Router, method: Method, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(path).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(serde_json::to_vec(&b).unwrap())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub fn dvol_b64(vol: &Volume) -> String {
    base64::engine::general_purpose::STANDARD.encode(encode(vol, ValueType::narrowest_for(vol.voxels())))
}

/// Smooth blob (`label` 0) or the same blob with a checkerboard texture
/// (`label` 1) on a 16×16×3 grid.
pub fn blob(i: usize, label: u8) -> Volume {
    Volume::from_fn([16, 16, 3], [1.0; 3], |x, y, z| {
        let r2 = (x as f64 - 7.5).powi(2) + (y as f64 - 7.5).powi(2);
        let base = 100.0 * (-r2 / 40.0).exp() + i as f64;
        if label == 1 && (x + y + z) % 2 == 0 {
            base + 40.0
        } else {
            base
        }
    })
    .unwrap()
}

pub fn square_slices(z: usize, lo: f64, hi: f64) -> Value {
    json!([{"z": z, "vertices": [[lo, lo], [hi, lo], [hi, hi], [lo, hi]]}])
}

/// Creates study `id` with `n` blob series and one labeled ROI per series.
pub async fn blob_study(h: &Harness, id: &str, n: usize) -> Vec<String> {
    let series: Vec<Value> =
        (0..n).map(|i| json!({"series_id": format!("{id}-s{i}"), "dvol": dvol_b64(&blob(i, (i % 2) as u8))})).collect();
    let (status, body) = h.post("/studies", json!({"study_id": id, "series": series})).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let mut rois = Vec::new();
    for i in 0..n {
        let roi = format!("{id}-r{i}");
        let (status, body) = h
            .post(
                &format!("/studies/{id}/rois"),
                json!({
                    "roi_id": roi,
                    "series_id": format!("{id}-s{i}"),
                    "slices": square_slices(1, 3.0, 12.0),
                    "labels": {"class": if i % 2 == 1 { "textured" } else { "smooth" }},
                }),
            )
            .await;
        assert_eq!(status, StatusCode::ACCEPTED, "{body}");
        rois.push(roi);
    }
    rois
}
