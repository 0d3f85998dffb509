//! IoU computation and greedy score-ordered detection/ground-truth
//! assignment — the kernel under both evaluators.

use thiserror::Error;

use crate::types::{BoundingBox, Detection, GroundTruthObject};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("detections must be sorted by descending score (violated at index {index})")]
    UnsortedDetections { index: usize },
    #[error("iou threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// Intersection over union of two boxes. Returns 0 when the union has
/// zero area, so zero-area boxes never match anything.
pub fn iou(a: BoundingBox, b: BoundingBox) -> f64 {
    let ix = (a.x_max().min(b.x_max()) - a.x_min().max(b.x_min())).max(0.0);
    let iy = (a.y_max().min(b.y_max()) - a.y_min().max(b.y_min())).max(0.0);
    let intersection = ix * iy;
    let union = a.area() + b.area() - intersection;
    if union <= 0.0 {
        0.0
    } else {
        intersection / union
    }
}

/// One detection/ground-truth assignment at or above the threshold used.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchPair {
    pub detection: usize,
    pub ground_truth: usize,
    pub iou: f64,
}

/// Partial matching produced by [`greedy_match`]. Every detection index
/// lands in exactly one of `pairs`, `ignored_detections` or
/// `unmatched_detections`; `unmatched_ground_truth` lists the non-ignore
/// ground truths left over (the false negatives).
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub pairs: Vec<MatchPair>,
    pub ignored_detections: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
    pub unmatched_ground_truth: Vec<usize>,
}

/// Greedy assignment in detection-score order.
///
/// Detections must already be sorted by descending score. Each detection
/// takes the still-unmatched non-ignore ground truth with the highest
/// IoU >= `iou_threshold`; IoU ties break toward the lowest ground-truth
/// index. When only ignore ground truths qualify the detection is marked
/// ignored (neither true nor false positive). Ignore ground truths are
/// never consumed, so several detections may sink into the same one.
pub fn greedy_match(
    dets: &[Detection],
    gts: &[GroundTruthObject],
    iou_threshold: f64,
    same_category_only: bool,
) -> Result<MatchResult, MatchError> {
    if !iou_threshold.is_finite() || iou_threshold <= 0.0 || iou_threshold > 1.0 {
        return Err(MatchError::InvalidThreshold(iou_threshold));
    }
    for i in 1..dets.len() {
        if dets[i].score() > dets[i - 1].score() {
            return Err(MatchError::UnsortedDetections { index: i });
        }
    }

    let mut taken = vec![false; gts.len()];
    let mut result = MatchResult {
        pairs: Vec::new(),
        ignored_detections: Vec::new(),
        unmatched_detections: Vec::new(),
        unmatched_ground_truth: Vec::new(),
    };

    for (di, det) in dets.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        let mut ignore_hit = false;
        for (gi, gt) in gts.iter().enumerate() {
            if same_category_only && gt.category != det.category() {
                continue;
            }
            let v = iou(det.bbox(), gt.bbox);
            if v < iou_threshold {
                continue;
            }
            if gt.ignore {
                ignore_hit = true;
            } else if !taken[gi] {
                // Strict improvement keeps the lowest index on ties.
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((gi, v));
                }
            }
        }
        match best {
            Some((gi, v)) => {
                taken[gi] = true;
                result.pairs.push(MatchPair {
                    detection: di,
                    ground_truth: gi,
                    iou: v,
                });
            }
            None if ignore_hit => result.ignored_detections.push(di),
            None => result.unmatched_detections.push(di),
        }
    }

    for (gi, gt) in gts.iter().enumerate() {
        if !gt.ignore && !taken[gi] {
            result.unmatched_ground_truth.push(gi);
        }
    }
    Ok(result)
}
