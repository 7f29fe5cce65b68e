//! Radiomics workbench service.
//!
//! Wraps the imaging, analytics and graph crates behind an HTTP API backed
//! by four file-backed stores (images, masks, features, models). ROI
//! submissions trigger background feature extraction; graph documents run
//! asynchronously and finished runs become experiment records that can be
//! listed and re-tested. [`cli::run_to_dir`] offers the same graph execution
//! without a server.

pub mod cli;
mod error;
pub mod http;
pub mod jobs;
pub mod runs;
pub mod service;
pub mod store;

pub use error::{ApiError, ApiResult, ErrorBody};
pub use http::router;
pub use service::{Config, Workbench};
