//! Fused detector post-processing: anchor-free grid decoding, class-aware
//! non-maximum suppression and letterbox coordinate mapping composed as
//! one deterministic pipeline from raw head outputs to image-space
//! detections.

mod grid;
mod letterbox;
mod nms;

use std::io;

use thiserror::Error;

pub use grid::{decode_grid, GridOutput};
pub use letterbox::LetterboxTransform;
pub use nms::nms;

use crate::types::Detection;

/// Output strides of a P6-style four-level detection head.
pub const STRIDES: [u32; 4] = [8, 16, 32, 64];

#[derive(Debug, Error)]
pub enum PostprocessError {
    #[error("grid payload has {actual} values, expected {expected}")]
    Shape { expected: usize, actual: usize },
    #[error("stride {0} is not one of {STRIDES:?}")]
    InvalidStride(u32),
    #[error("grids must cover strides {STRIDES:?} exactly once, got {found:?}")]
    StrideSet { found: Vec<u32> },
    #[error(
        "grid at stride {stride} is {rows}x{cols} cells, inconsistent with \
         network size {net_width}x{net_height}"
    )]
    NetworkSizeMismatch {
        stride: u32,
        rows: usize,
        cols: usize,
        net_width: u32,
        net_height: u32,
    },
    #[error("grid value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("grid {channel} channel at index {index} is {value}, outside [0, 1]")]
    ValueRange {
        channel: &'static str,
        index: usize,
        value: f64,
    },
    #[error("decoded box is not representable: {0}")]
    InvalidBox(String),
    #[error("invalid config: {reason}")]
    InvalidConfig { reason: String },
    #[error("bad grid dump header: {reason}")]
    Header { reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Suppression and score-gate settings.
///
/// `score_threshold` gates decoding; `iou_threshold` and `class_aware`
/// drive the suppression pass.
#[derive(Debug, Clone, PartialEq)]
pub struct NmsConfig {
    pub iou_threshold: f64,
    pub score_threshold: f64,
    pub class_aware: bool,
}

impl Default for NmsConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.65,
            score_threshold: 0.01,
            class_aware: true,
        }
    }
}

impl NmsConfig {
    pub fn validate(&self) -> Result<(), PostprocessError> {
        for (name, v) in [
            ("iou_threshold", self.iou_threshold),
            ("score_threshold", self.score_threshold),
        ] {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return Err(PostprocessError::InvalidConfig {
                    reason: format!("{name} {v} outside (0, 1)"),
                });
            }
        }
        Ok(())
    }
}

/// Decode all grids, suppress, then map the surviving boxes from network
/// coordinates back to original image coordinates, clamped to the image
/// bounds.
///
/// The grids must cover the stride set exactly and agree with the
/// transform's network size. Concatenation order is fixed as ascending
/// stride, so the result is deterministic regardless of input order.
pub fn fused_pipeline(
    grids: &[GridOutput],
    lt: &LetterboxTransform,
    cfg: &NmsConfig,
) -> Result<Vec<Detection>, PostprocessError> {
    cfg.validate()?;

    let mut order: Vec<usize> = (0..grids.len()).collect();
    order.sort_by_key(|&i| grids[i].stride());
    let found: Vec<u32> = order.iter().map(|&i| grids[i].stride()).collect();
    if found != STRIDES {
        return Err(PostprocessError::StrideSet { found });
    }

    let (net_w, net_h) = lt.network_size();
    for &i in &order {
        let g = &grids[i];
        if g.cols() as u64 * g.stride() as u64 != net_w as u64
            || g.rows() as u64 * g.stride() as u64 != net_h as u64
        {
            return Err(PostprocessError::NetworkSizeMismatch {
                stride: g.stride(),
                rows: g.rows(),
                cols: g.cols(),
                net_width: net_w,
                net_height: net_h,
            });
        }
    }

    let mut decoded = Vec::new();
    for &i in &order {
        decoded.extend(decode_grid(&grids[i], cfg.score_threshold)?);
    }
    let kept = nms(&decoded, cfg)?;

    kept.into_iter()
        .map(|d| {
            let mapped = lt.box_to_image_clamped(d.bbox());
            Detection::new(mapped, d.category(), d.score())
                .map_err(|e| PostprocessError::InvalidBox(e.to_string()))
        })
        .collect()
}
