//! Background feature extraction.
//!
//! Submitting an ROI enqueues a job and returns at once; a fixed pool of
//! worker threads drains the queue. Jobs are deduplicated by feature key, so
//! identical submissions share one computation and one stored result.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use radiowb_core::{extract_feature_vector, ExtractionSettings, RoiPolygon};
use serde::{Deserialize, Serialize};

use crate::store::{feature_key, Stores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub roi_id: String,
    pub settings_hash: String,
    /// Feature-store key of the result.
    pub feature_key: String,
    pub state: JobState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Task {
    job_id: String,
    key: String,
    volume: String,
    roi: RoiPolygon,
    settings: ExtractionSettings,
}

#[derive(Default)]
struct Table {
    jobs: HashMap<String, Job>,
    /// Feature key to the job that owns it.
    by_key: HashMap<String, String>,
    /// (roi id, settings hash) to the latest job.
    by_roi: HashMap<(String, String), String>,
}

struct Shared {
    table: Mutex<Table>,
    stores: Arc<Stores>,
    computed: AtomicUsize,
}

pub struct JobQueue {
    shared: Arc<Shared>,
    tx: Mutex<Option<Sender<Task>>>,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

impl JobQueue {
    pub fn start(stores: Arc<Stores>, workers: usize) -> Self {
        let shared = Arc::new(Shared { table: Mutex::default(), stores, computed: AtomicUsize::new(0) });
        let (tx, rx) = channel::<Task>();
        let rx = Arc::new(Mutex::new(rx));
        let handles = (0..workers.max(1))
            .map(|i| {
                let (shared, rx) = (shared.clone(), rx.clone());
                std::thread::Builder::new()
                    .name(format!("extract-{i}"))
                    .spawn(move || worker(&shared, &rx))
                    .expect("spawn extraction worker")
            })
            .collect();
        Self { shared, tx: Mutex::new(Some(tx)), workers: Mutex::new(handles) }
    }

    /// Enqueues an extraction unless an identical one is queued, running or
    /// already persisted. Returns the owning job.
    pub fn submit(&self, roi: &RoiPolygon, volume: &str, settings: &ExtractionSettings) -> Job {
        let hash = settings.hash();
        let key = feature_key(&roi.roi_id, &roi.slices, volume, &hash);
        let mut table = self.shared.table.lock().unwrap();
        if let Some(id) = table.by_key.get(&key).cloned() {
            let job = table.jobs[&id].clone();
            if job.state != JobState::Failed {
                table.by_roi.insert((roi.roi_id.clone(), hash), id);
                return job;
            }
        }
        let persisted = self.shared.stores.features.contains(&key);
        let job = Job {
            job_id: uuid::Uuid::new_v4().to_string(),
            roi_id: roi.roi_id.clone(),
            settings_hash: hash.clone(),
            feature_key: key.clone(),
            state: if persisted { JobState::Done } else { JobState::Queued },
            error: None,
        };
        table.jobs.insert(job.job_id.clone(), job.clone());
        table.by_key.insert(key.clone(), job.job_id.clone());
        table.by_roi.insert((roi.roi_id.clone(), hash), job.job_id.clone());
        if !persisted {
            let task = Task {
                job_id: job.job_id.clone(),
                key,
                volume: volume.to_string(),
                roi: roi.clone(),
                settings: settings.clone(),
            };
            let sent = self.tx.lock().unwrap().as_ref().map(|tx| tx.send(task).is_ok()).unwrap_or(false);
            if !sent {
                let j = table.jobs.get_mut(&job.job_id).expect("just inserted");
                j.state = JobState::Failed;
                j.error = Some("extraction queue is shut down".into());
                return j.clone();
            }
        }
        job
    }

    pub fn job(&self, id: &str) -> Option<Job> {
        self.shared.table.lock().unwrap().jobs.get(id).cloned()
    }

    /// Latest job submitted for this roi and settings hash.
    pub fn latest(&self, roi_id: &str, settings_hash: &str) -> Option<Job> {
        let table = self.shared.table.lock().unwrap();
        let id = table.by_roi.get(&(roi_id.to_string(), settings_hash.to_string()))?;
        table.jobs.get(id).cloned()
    }

    /// Number of feature vectors actually computed by the workers.
    pub fn computed(&self) -> usize {
        self.shared.computed.load(Ordering::SeqCst)
    }

    /// Stops accepting work and waits for the queue to drain.
    pub fn shutdown(&self) {
        self.tx.lock().unwrap().take();
        for h in self.workers.lock().unwrap().drain(..) {
            let _ = h.join();
        }
    }
}

impl Drop for JobQueue {
    fn drop(&mut self) {
        self.tx.lock().unwrap().take();
    }
}

fn set_state(shared: &Shared, id: &str, state: JobState, error: Option<String>) {
    if let Some(job) = shared.table.lock().unwrap().jobs.get_mut(id) {
        job.state = state;
        job.error = error;
    }
}

fn worker(shared: &Shared, rx: &Mutex<Receiver<Task>>) {
    loop {
        let task = match rx.lock().unwrap().recv() {
            Ok(t) => t,
            Err(_) => return,
        };
        set_state(shared, &task.job_id, JobState::Running, None);
        let outcome = shared
            .stores
            .images
            .volume(&task.volume)
            .map_err(|e| e.message)
            .and_then(|vol| extract_feature_vector(&vol, &task.roi, &task.settings).map_err(|e| e.to_string()))
            .and_then(|v| {
                shared.computed.fetch_add(1, Ordering::SeqCst);
                shared.stores.features.put(&task.key, &v).map_err(|e| e.message)
            });
        match outcome {
            Ok(()) => set_state(shared, &task.job_id, JobState::Done, None),
            Err(e) => set_state(shared, &task.job_id, JobState::Failed, Some(e)),
        }
    }
}
