//! Shared domain types: boxes, detections, frames, timestamped prediction
//! events, and the six-metric evaluation block.
//!
//! Every type is validated at construction, so any value reachable at
//! runtime satisfies its invariants. All timestamps are integer
//! microseconds.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Sentinel metric value for a slice with no ground truth.
pub const NO_GROUND_TRUTH: f64 = -1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("inverted box extent ({x_min},{y_min})..({x_max},{y_max})")]
    InvertedExtent {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("frame dimensions must be positive, got {width}x{height}")]
    InvalidFrameDims { width: u32, height: u32 },
    #[error("metric value {0} outside [0, 1] and not the no-ground-truth sentinel")]
    MetricOutOfRange(f64),
}

/// Index into the active category table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryId(pub usize);

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Axis-aligned rectangle in pixel coordinates, corner form.
///
/// Zero-area boxes are legal (degraded annotations exist in real data);
/// inverted extents and non-finite coordinates are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, DomainError> {
        if !(x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite()) {
            return Err(DomainError::NonFinite);
        }
        if x_max < x_min || y_max < y_min {
            return Err(DomainError::InvertedExtent {
                x_min,
                y_min,
                x_max,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Area in square pixels.
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// One scored, categorized box emitted by a detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    bbox: BoundingBox,
    category: CategoryId,
    score: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox, category: CategoryId, score: f64) -> Result<Self, DomainError> {
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(DomainError::ScoreOutOfRange(score));
        }
        Ok(Self {
            bbox,
            category,
            score,
        })
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn category(&self) -> CategoryId {
        self.category
    }

    pub fn score(&self) -> f64 {
        self.score
    }
}

/// An annotated object. `ignore` objects never count as false negatives
/// and matching against them neither rewards nor punishes a detection.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthObject {
    pub bbox: BoundingBox,
    pub category: CategoryId,
    pub ignore: bool,
}

impl GroundTruthObject {
    pub fn new(bbox: BoundingBox, category: CategoryId, ignore: bool) -> Self {
        Self {
            bbox,
            category,
            ignore,
        }
    }
}

/// One video frame: identity, capture instant, dimensions and annotations.
///
/// Capture times must be strictly increasing within a sequence; that is a
/// cross-frame invariant checked at ingest and re-checked by the temporal
/// association step.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_id: i64,
    pub sequence_id: i64,
    pub capture_time_us: i64,
    pub width: u32,
    pub height: u32,
    pub ground_truth: Vec<GroundTruthObject>,
}

impl FrameRecord {
    pub fn new(
        frame_id: i64,
        sequence_id: i64,
        capture_time_us: i64,
        width: u32,
        height: u32,
        ground_truth: Vec<GroundTruthObject>,
    ) -> Result<Self, DomainError> {
        if width == 0 || height == 0 {
            return Err(DomainError::InvalidFrameDims { width, height });
        }
        Ok(Self {
            frame_id,
            sequence_id,
            capture_time_us,
            width,
            height,
            ground_truth,
        })
    }
}

/// One detector output: the detections plus the instant they became
/// available to a consumer.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionEvent {
    pub source_frame_id: i64,
    pub emit_time_us: i64,
    pub detections: Vec<Detection>,
}

/// The six-metric block plus per-category breakdown.
///
/// Each field is in [0, 1], or [`NO_GROUND_TRUTH`] when the corresponding
/// slice holds no ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub ap: f64,
    pub ap50: f64,
    pub ap75: f64,
    pub ap_small: f64,
    pub ap_medium: f64,
    pub ap_large: f64,
    pub per_category_ap: BTreeMap<CategoryId, f64>,
}

impl EvalResult {
    /// Re-check the value-range invariant on every field.
    pub fn validate(&self) -> Result<(), DomainError> {
        let mut values = vec![
            self.ap,
            self.ap50,
            self.ap75,
            self.ap_small,
            self.ap_medium,
            self.ap_large,
        ];
        values.extend(self.per_category_ap.values().copied());
        for v in values {
            let in_range = v.is_finite() && (0.0..=1.0).contains(&v);
            if !in_range && v != NO_GROUND_TRUTH {
                return Err(DomainError::MetricOutOfRange(v));
            }
        }
        Ok(())
    }
}
