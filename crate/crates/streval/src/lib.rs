//! Detector-agnostic toolkit for streaming perception: offline COCO-style
//! average precision, latency-aware streaming AP, fused detector
//! post-processing, a latency-driven real-time stream simulator, and
//! multi-dataset class unification.
//!
//! The library is the primary interface; each major capability has a
//! runnable example:
//!
//! - `offline_eval` — score per-frame detections with the offline metric
//! - `streaming_eval` — temporal association and the streaming metric
//! - `postprocess_pipeline` — grid decode + NMS + letterbox mapping
//! - `simulate_realtime` — discrete-event simulation of a real-time detector
//! - `latency_sweep` — the latency/accuracy trade-off table
//! - `class_remap` — unify dataset taxonomies onto one category table
//!
//! ```bash
//! cargo run -p streval --example offline_eval
//! ```
//!
//! A thin `streval` binary exposes the same pipelines as subcommands for
//! file-based workflows.

pub mod dataset;
pub mod matching;
pub mod offline;
pub mod postprocess;
pub mod sim;
pub mod streaming;
pub mod types;

pub use types::{
    BoundingBox, CategoryId, Detection, DomainError, EvalResult, FrameRecord, GroundTruthObject,
    PredictionEvent, NO_GROUND_TRUTH,
};
