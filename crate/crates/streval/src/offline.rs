//! COCO-protocol average precision over a set of frames: per-category,
//! per-IoU-threshold, per-area-range PR curves with 101-point
//! interpolated sampling, aggregated into the six-metric block.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::matching::greedy_match;
use crate::types::{
    CategoryId, Detection, EvalResult, FrameRecord, GroundTruthObject, NO_GROUND_TRUTH,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("prediction references unknown frame {frame_id}")]
    UnknownFrame { frame_id: i64 },
    #[error("duplicate frame id {frame_id}")]
    DuplicateFrame { frame_id: i64 },
    #[error("no frame has ground truth")]
    EmptyDataset,
    #[error("invalid evaluation config: {reason}")]
    InvalidConfig { reason: String },
}

/// Area-range split in square pixels. The three ranges must be disjoint
/// and cover [0, inf).
#[derive(Debug, Clone, PartialEq)]
pub struct AreaRanges {
    pub small: (f64, f64),
    pub medium: (f64, f64),
    pub large: (f64, f64),
}

impl Default for AreaRanges {
    fn default() -> Self {
        Self {
            small: (0.0, 32.0 * 32.0),
            medium: (32.0 * 32.0, 96.0 * 96.0),
            large: (96.0 * 96.0, f64::INFINITY),
        }
    }
}

impl AreaRanges {
    fn validate(&self) -> Result<(), EvalError> {
        let ok = self.small.0 == 0.0
            && self.small.0 < self.small.1
            && self.small.1 == self.medium.0
            && self.medium.0 < self.medium.1
            && self.medium.1 == self.large.0
            && self.large.0 < self.large.1
            && self.large.1 == f64::INFINITY;
        if ok {
            Ok(())
        } else {
            Err(EvalError::InvalidConfig {
                reason: "area ranges must be disjoint and cover [0, inf)".into(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Matching thresholds, strictly increasing, each in (0, 1].
    pub iou_thresholds: Vec<f64>,
    /// Number of evenly spaced recall sample points in [0, 1].
    pub recall_points: usize,
    /// Per-frame cap on scored detections, applied by descending score.
    pub max_detections_per_frame: usize,
    pub area_ranges: AreaRanges,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            // 0.50 to 0.95 in steps of 0.05; integer construction keeps
            // 0.50 and 0.75 exactly representable for the ap50/ap75 slices.
            iou_thresholds: (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect(),
            recall_points: 101,
            max_detections_per_frame: 100,
            area_ranges: AreaRanges::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.iou_thresholds.is_empty() {
            return Err(EvalError::InvalidConfig {
                reason: "iou_thresholds must be non-empty".into(),
            });
        }
        for (i, &t) in self.iou_thresholds.iter().enumerate() {
            if !t.is_finite() || t <= 0.0 || t > 1.0 {
                return Err(EvalError::InvalidConfig {
                    reason: format!("iou threshold {t} outside (0, 1]"),
                });
            }
            if i > 0 && t <= self.iou_thresholds[i - 1] {
                return Err(EvalError::InvalidConfig {
                    reason: "iou_thresholds must be strictly increasing".into(),
                });
            }
        }
        if self.recall_points < 2 {
            return Err(EvalError::InvalidConfig {
                reason: "recall_points must be at least 2".into(),
            });
        }
        if self.max_detections_per_frame == 0 {
            return Err(EvalError::InvalidConfig {
                reason: "max_detections_per_frame must be positive".into(),
            });
        }
        self.area_ranges.validate()
    }
}

/// Interpolated precision sampled on the recall grid, for one category at
/// one IoU threshold. Exposed for plotting and debugging.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionRecallCurve {
    pub recalls: Vec<f64>,
    pub interpolated_precisions: Vec<f64>,
}

impl PrecisionRecallCurve {
    /// Mean of the sampled precisions.
    pub fn average_precision(&self) -> f64 {
        self.interpolated_precisions.iter().sum::<f64>() / self.interpolated_precisions.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    TruePositive,
    FalsePositive,
    Ignored,
}

/// Pooled, score-sorted detections for one (category, threshold, range)
/// slice; `entries` hold (score, outcome) in descending score order with
/// ties kept in frame-then-index order.
fn sample_average_precision(
    entries: &[(f64, Outcome)],
    num_gt: usize,
    recall_points: usize,
) -> f64 {
    debug_assert!(num_gt > 0);
    let mut recalls = Vec::new();
    let mut precisions = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    for &(_, outcome) in entries {
        match outcome {
            Outcome::TruePositive => tp += 1,
            Outcome::FalsePositive => fp += 1,
            Outcome::Ignored => continue,
        }
        recalls.push(tp as f64 / num_gt as f64);
        precisions.push(tp as f64 / (tp + fp) as f64);
    }
    // Running maximum from the right turns the raw precisions into the
    // interpolated envelope.
    for i in (0..precisions.len().saturating_sub(1)).rev() {
        precisions[i] = precisions[i].max(precisions[i + 1]);
    }
    let mut total = 0.0;
    let denom = (recall_points - 1) as f64;
    let mut idx = 0usize;
    for k in 0..recall_points {
        let r = k as f64 / denom;
        while idx < recalls.len() && recalls[idx] < r {
            idx += 1;
        }
        if idx < recalls.len() {
            total += precisions[idx];
        }
    }
    total / recall_points as f64
}

fn area_in_range(area: f64, range: (f64, f64)) -> bool {
    area >= range.0 && area < range.1
}

struct FrameSlice<'a> {
    /// Per-frame detections after the per-frame cap, score-descending,
    /// tagged with their pooling order key.
    dets: Vec<&'a Detection>,
    gts: Vec<&'a GroundTruthObject>,
}

/// Offline (latency-free) evaluation: each frame scores against its own
/// predictions. Detections need not be sorted. Missing map entries mean
/// "no detections for that frame".
pub fn evaluate_offline(
    frames: &[FrameRecord],
    predictions: &HashMap<i64, Vec<Detection>>,
    config: &EvalConfig,
) -> Result<EvalResult, EvalError> {
    config.validate()?;

    let mut ids = HashSet::with_capacity(frames.len());
    for f in frames {
        if !ids.insert(f.frame_id) {
            return Err(EvalError::DuplicateFrame {
                frame_id: f.frame_id,
            });
        }
    }
    for &frame_id in predictions.keys() {
        if !ids.contains(&frame_id) {
            return Err(EvalError::UnknownFrame { frame_id });
        }
    }
    if frames.iter().all(|f| f.ground_truth.is_empty()) {
        return Err(EvalError::EmptyDataset);
    }

    // Per-frame truncation to the detection cap, by descending score with
    // ties kept in input order.
    let truncated: Vec<Vec<Detection>> = frames
        .iter()
        .map(|f| {
            let mut dets = predictions.get(&f.frame_id).cloned().unwrap_or_default();
            dets.sort_by(|a, b| b.score().partial_cmp(&a.score()).unwrap());
            dets.truncate(config.max_detections_per_frame);
            dets
        })
        .collect();

    let mut categories: BTreeSet<CategoryId> = BTreeSet::new();
    for f in frames {
        categories.extend(f.ground_truth.iter().map(|g| g.category));
    }
    for dets in &truncated {
        categories.extend(dets.iter().map(|d| d.category()));
    }

    let full_range = (0.0, f64::INFINITY);
    let ranges = [
        full_range,
        config.area_ranges.small,
        config.area_ranges.medium,
        config.area_ranges.large,
    ];
    let n_thr = config.iou_thresholds.len();

    // ap_grid[category][range][threshold]; NO_GROUND_TRUTH marks slices
    // with no (area-effective) ground truth.
    let mut ap_grid: BTreeMap<CategoryId, Vec<Vec<f64>>> = BTreeMap::new();

    for &cat in &categories {
        let slices: Vec<FrameSlice> = frames
            .iter()
            .zip(&truncated)
            .map(|(f, dets)| FrameSlice {
                dets: dets.iter().filter(|d| d.category() == cat).collect(),
                gts: f
                    .ground_truth
                    .iter()
                    .filter(|g| g.category == cat)
                    .collect(),
            })
            .collect();

        let mut per_range = vec![vec![NO_GROUND_TRUTH; n_thr]; ranges.len()];
        for (ri, &range) in ranges.iter().enumerate() {
            // Out-of-range ground truth becomes ignore rather than being
            // deleted; deleting would create spurious false positives at
            // the range borders.
            let effective_gts: Vec<Vec<GroundTruthObject>> = slices
                .iter()
                .map(|s| {
                    s.gts
                        .iter()
                        .map(|g| {
                            let mut g = (*g).clone();
                            g.ignore = g.ignore || !area_in_range(g.bbox.area(), range);
                            g
                        })
                        .collect()
                })
                .collect();
            let num_gt: usize = effective_gts
                .iter()
                .map(|gs| gs.iter().filter(|g| !g.ignore).count())
                .sum();
            if num_gt == 0 {
                continue;
            }
            for (ti, &thr) in config.iou_thresholds.iter().enumerate() {
                let mut pooled: Vec<(f64, Outcome)> = Vec::new();
                for (slice, gts) in slices.iter().zip(&effective_gts) {
                    let dets: Vec<Detection> = slice.dets.iter().map(|d| (*d).clone()).collect();
                    let m = greedy_match(&dets, gts, thr, true)
                        .expect("per-frame detections are score-sorted and threshold validated");
                    let mut outcomes = vec![Outcome::FalsePositive; dets.len()];
                    for p in &m.pairs {
                        outcomes[p.detection] = Outcome::TruePositive;
                    }
                    for &di in &m.ignored_detections {
                        outcomes[di] = Outcome::Ignored;
                    }
                    for &di in &m.unmatched_detections {
                        // Unmatched detections whose own area is out of
                        // range are ignored, not false positives.
                        if !area_in_range(dets[di].bbox().area(), range) {
                            outcomes[di] = Outcome::Ignored;
                        }
                    }
                    pooled.extend(dets.iter().zip(outcomes).map(|(d, o)| (d.score(), o)));
                }
                // Stable sort keeps frame-then-index order on score ties.
                pooled.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
                per_range[ri][ti] =
                    sample_average_precision(&pooled, num_gt, config.recall_points);
            }
        }
        ap_grid.insert(cat, per_range);
    }

    let mean_over = |values: Vec<f64>| -> f64 {
        let valid: Vec<f64> = values
            .into_iter()
            .filter(|&v| v != NO_GROUND_TRUTH)
            .collect();
        if valid.is_empty() {
            NO_GROUND_TRUTH
        } else {
            valid.iter().sum::<f64>() / valid.len() as f64
        }
    };

    let range_mean = |ri: usize| -> f64 {
        mean_over(
            ap_grid
                .values()
                .map(|per_range| {
                    let aps = &per_range[ri];
                    if aps[0] == NO_GROUND_TRUTH {
                        NO_GROUND_TRUTH
                    } else {
                        aps.iter().sum::<f64>() / aps.len() as f64
                    }
                })
                .collect(),
        )
    };

    let threshold_index = |wanted: f64| -> Option<usize> {
        config
            .iou_thresholds
            .iter()
            .position(|&t| (t - wanted).abs() < 1e-9)
    };
    let single_threshold_mean = |wanted: f64| -> f64 {
        match threshold_index(wanted) {
            Some(ti) => mean_over(
                ap_grid
                    .values()
                    .map(|per_range| {
                        if per_range[0][0] == NO_GROUND_TRUTH {
                            NO_GROUND_TRUTH
                        } else {
                            per_range[0][ti]
                        }
                    })
                    .collect(),
            ),
            None => NO_GROUND_TRUTH,
        }
    };

    let per_category_ap: BTreeMap<CategoryId, f64> = ap_grid
        .iter()
        .map(|(&cat, per_range)| {
            let aps = &per_range[0];
            let v = if aps[0] == NO_GROUND_TRUTH {
                NO_GROUND_TRUTH
            } else {
                aps.iter().sum::<f64>() / aps.len() as f64
            };
            (cat, v)
        })
        .collect();

    Ok(EvalResult {
        ap: range_mean(0),
        ap50: single_threshold_mean(0.50),
        ap75: single_threshold_mean(0.75),
        ap_small: range_mean(1),
        ap_medium: range_mean(2),
        ap_large: range_mean(3),
        per_category_ap,
    })
}

/// The intermediate curve for one category at one IoU threshold over a
/// single pooled detection/ground-truth collection.
pub fn pr_curve(
    dets: &[Detection],
    gts: &[GroundTruthObject],
    iou_threshold: f64,
    category: CategoryId,
    recall_points: usize,
) -> Result<PrecisionRecallCurve, EvalError> {
    if recall_points < 2 {
        return Err(EvalError::InvalidConfig {
            reason: "recall_points must be at least 2".into(),
        });
    }
    if !iou_threshold.is_finite() || iou_threshold <= 0.0 || iou_threshold > 1.0 {
        return Err(EvalError::InvalidConfig {
            reason: format!("iou threshold {iou_threshold} outside (0, 1]"),
        });
    }
    let mut cat_dets: Vec<Detection> = dets
        .iter()
        .filter(|d| d.category() == category)
        .cloned()
        .collect();
    cat_dets.sort_by(|a, b| b.score().partial_cmp(&a.score()).unwrap());
    let cat_gts: Vec<GroundTruthObject> = gts
        .iter()
        .filter(|g| g.category == category)
        .cloned()
        .collect();
    let num_gt = cat_gts.iter().filter(|g| !g.ignore).count();
    if num_gt == 0 {
        return Err(EvalError::EmptyDataset);
    }

    let m = greedy_match(&cat_dets, &cat_gts, iou_threshold, true)
        .expect("detections sorted and threshold validated above");
    let mut outcomes = vec![Outcome::FalsePositive; cat_dets.len()];
    for p in &m.pairs {
        outcomes[p.detection] = Outcome::TruePositive;
    }
    for &di in &m.ignored_detections {
        outcomes[di] = Outcome::Ignored;
    }
    let entries: Vec<(f64, Outcome)> = cat_dets
        .iter()
        .zip(&outcomes)
        .map(|(d, &o)| (d.score(), o))
        .collect();

    // Same construction as sample_average_precision, but keeping the grid.
    let mut raw_recalls = Vec::new();
    let mut raw_precisions = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    for &(_, outcome) in &entries {
        match outcome {
            Outcome::TruePositive => tp += 1,
            Outcome::FalsePositive => fp += 1,
            Outcome::Ignored => continue,
        }
        raw_recalls.push(tp as f64 / num_gt as f64);
        raw_precisions.push(tp as f64 / (tp + fp) as f64);
    }
    for i in (0..raw_precisions.len().saturating_sub(1)).rev() {
        raw_precisions[i] = raw_precisions[i].max(raw_precisions[i + 1]);
    }
    let denom = (recall_points - 1) as f64;
    let mut recalls = Vec::with_capacity(recall_points);
    let mut sampled = Vec::with_capacity(recall_points);
    let mut idx = 0usize;
    for k in 0..recall_points {
        let r = k as f64 / denom;
        while idx < raw_recalls.len() && raw_recalls[idx] < r {
            idx += 1;
        }
        recalls.push(r);
        sampled.push(if idx < raw_recalls.len() {
            raw_precisions[idx]
        } else {
            0.0
        });
    }
    Ok(PrecisionRecallCurve {
        recalls,
        interpolated_precisions: sampled,
    })
}
