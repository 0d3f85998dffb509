//! Direct enumeration of the detection metric block: naive per-frame
//! matching loops, explicit cumulative precision/recall sequences, and
//! per-point sampling without the running-maximum envelope shortcut.

use std::collections::{BTreeMap, BTreeSet};

use streval::offline::EvalConfig;
use streval::types::{
    BoundingBox, CategoryId, Detection, EvalResult, GroundTruthObject, NO_GROUND_TRUTH,
};

use crate::{ReferenceError, MAX_BOXES};

fn box_iou(a: BoundingBox, b: BoundingBox) -> f64 {
    let w = (a.x_max().min(b.x_max()) - a.x_min().max(b.x_min())).max(0.0);
    let h = (a.y_max().min(b.y_max()) - a.y_min().max(b.y_min())).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Tp,
    Fp,
    Skip,
}

/// Score-descending order, ties by original position.
fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score().partial_cmp(&dets[a].score()).unwrap());
    order
}

fn in_range(area: f64, lo: f64, hi: f64) -> bool {
    area >= lo && area < hi
}

/// Naive matching of one frame's category slice at one threshold and one
/// area range: walk detections in score order; take the best still-free
/// non-ignore ground truth (ties toward the lowest index); fall back to
/// any qualifying ignore ground truth; otherwise false positive unless
/// the detection's own area is out of range.
fn mark_frame(
    dets: &[Detection],
    gts: &[GroundTruthObject],
    thr: f64,
    lo: f64,
    hi: f64,
) -> Vec<(f64, Mark)> {
    let ignored: Vec<bool> = gts
        .iter()
        .map(|g| g.ignore || !in_range(g.bbox.area(), lo, hi))
        .collect();
    let mut free = vec![true; gts.len()];
    let mut out = vec![(0.0, Mark::Fp); dets.len()];
    for &di in &score_order(dets) {
        let d = &dets[di];
        let mut best_gi = usize::MAX;
        let mut best_iou = 0.0;
        for (gi, g) in gts.iter().enumerate() {
            if ignored[gi] || !free[gi] {
                continue;
            }
            let v = box_iou(d.bbox(), g.bbox);
            if v >= thr && v > best_iou {
                best_iou = v;
                best_gi = gi;
            }
        }
        let mark = if best_gi != usize::MAX {
            free[best_gi] = false;
            Mark::Tp
        } else {
            let sunk = gts
                .iter()
                .enumerate()
                .any(|(gi, g)| ignored[gi] && box_iou(d.bbox(), g.bbox) >= thr);
            if sunk || !in_range(d.bbox().area(), lo, hi) {
                Mark::Skip
            } else {
                Mark::Fp
            }
        };
        out[di] = (d.score(), mark);
    }
    out
}

/// Average precision for one pooled slice: cumulative PR sequence walked
/// explicitly, then each sampled recall point takes the highest raw
/// precision among entries at or beyond it.
fn slice_ap(marked: &[(f64, Mark)], num_gt: usize, recall_points: usize) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut curve: Vec<(f64, f64)> = Vec::new(); // (recall, precision)
    for &(_, mark) in marked {
        match mark {
            Mark::Tp => tp += 1,
            Mark::Fp => fp += 1,
            Mark::Skip => continue,
        }
        curve.push((tp as f64 / num_gt as f64, tp as f64 / (tp + fp) as f64));
    }
    let mut total = 0.0;
    for k in 0..recall_points {
        let r = k as f64 / (recall_points - 1) as f64;
        let mut best = 0.0f64;
        for &(recall, precision) in &curve {
            if recall >= r && precision > best {
                best = precision;
            }
        }
        total += best;
    }
    total / recall_points as f64
}

/// Brute-force counterpart of the offline evaluator over parallel
/// per-frame detection and ground-truth collections. Empty instances
/// yield the all-sentinel block instead of an error.
pub fn ref_ap(
    gts_per_frame: &[Vec<GroundTruthObject>],
    dets_per_frame: &[Vec<Detection>],
    config: &EvalConfig,
) -> Result<EvalResult, ReferenceError> {
    assert_eq!(gts_per_frame.len(), dets_per_frame.len());
    let n_dets: usize = dets_per_frame.iter().map(Vec::len).sum();
    let n_gts: usize = gts_per_frame.iter().map(Vec::len).sum();
    if n_dets > MAX_BOXES || n_gts > MAX_BOXES {
        return Err(ReferenceError::TooLarge {
            count: n_dets.max(n_gts),
            max: MAX_BOXES,
        });
    }

    // Per-frame cap, by descending score.
    let capped: Vec<Vec<Detection>> = dets_per_frame
        .iter()
        .map(|dets| {
            score_order(dets)
                .into_iter()
                .take(config.max_detections_per_frame)
                .map(|i| dets[i].clone())
                .collect()
        })
        .collect();

    let mut categories: BTreeSet<CategoryId> = BTreeSet::new();
    for gts in gts_per_frame {
        categories.extend(gts.iter().map(|g| g.category));
    }
    for dets in &capped {
        categories.extend(dets.iter().map(|d| d.category()));
    }

    let ranges = [
        (0.0, f64::INFINITY),
        config.area_ranges.small,
        config.area_ranges.medium,
        config.area_ranges.large,
    ];

    let mut grid: BTreeMap<CategoryId, Vec<Vec<f64>>> = BTreeMap::new();
    for &cat in &categories {
        let mut per_range =
            vec![vec![NO_GROUND_TRUTH; config.iou_thresholds.len()]; ranges.len()];
        for (ri, &(lo, hi)) in ranges.iter().enumerate() {
            let num_gt: usize = gts_per_frame
                .iter()
                .map(|gts| {
                    gts.iter()
                        .filter(|g| {
                            g.category == cat && !g.ignore && in_range(g.bbox.area(), lo, hi)
                        })
                        .count()
                })
                .sum();
            if num_gt == 0 {
                continue;
            }
            for (ti, &thr) in config.iou_thresholds.iter().enumerate() {
                let mut pooled: Vec<(f64, Mark)> = Vec::new();
                for (gts, dets) in gts_per_frame.iter().zip(&capped) {
                    let cat_dets: Vec<Detection> = dets
                        .iter()
                        .filter(|d| d.category() == cat)
                        .cloned()
                        .collect();
                    let cat_gts: Vec<GroundTruthObject> = gts
                        .iter()
                        .filter(|g| g.category == cat)
                        .cloned()
                        .collect();
                    pooled.extend(mark_frame(&cat_dets, &cat_gts, thr, lo, hi));
                }
                let order = {
                    let mut o: Vec<usize> = (0..pooled.len()).collect();
                    o.sort_by(|&a, &b| pooled[b].0.partial_cmp(&pooled[a].0).unwrap());
                    o
                };
                let sorted: Vec<(f64, Mark)> = order.into_iter().map(|i| pooled[i]).collect();
                per_range[ri][ti] = slice_ap(&sorted, num_gt, config.recall_points);
            }
        }
        grid.insert(cat, per_range);
    }

    let mean = |vals: Vec<f64>| {
        let valid: Vec<f64> = vals.into_iter().filter(|&v| v != NO_GROUND_TRUTH).collect();
        if valid.is_empty() {
            NO_GROUND_TRUTH
        } else {
            valid.iter().sum::<f64>() / valid.len() as f64
        }
    };
    let range_mean = |ri: usize| {
        mean(
            grid.values()
                .map(|pr| {
                    if pr[ri][0] == NO_GROUND_TRUTH {
                        NO_GROUND_TRUTH
                    } else {
                        pr[ri].iter().sum::<f64>() / pr[ri].len() as f64
                    }
                })
                .collect(),
        )
    };
    let at_threshold = |wanted: f64| {
        match config
            .iou_thresholds
            .iter()
            .position(|&t| (t - wanted).abs() < 1e-9)
        {
            None => NO_GROUND_TRUTH,
            Some(ti) => mean(
                grid.values()
                    .map(|pr| {
                        if pr[0][0] == NO_GROUND_TRUTH {
                            NO_GROUND_TRUTH
                        } else {
                            pr[0][ti]
                        }
                    })
                    .collect(),
            ),
        }
    };

    Ok(EvalResult {
        ap: range_mean(0),
        ap50: at_threshold(0.50),
        ap75: at_threshold(0.75),
        ap_small: range_mean(1),
        ap_medium: range_mean(2),
        ap_large: range_mean(3),
        per_category_ap: grid
            .iter()
            .map(|(&cat, pr)| {
                let v = if pr[0][0] == NO_GROUND_TRUTH {
                    NO_GROUND_TRUTH
                } else {
                    pr[0].iter().sum::<f64>() / pr[0].len() as f64
                };
                (cat, v)
            })
            .collect(),
    })
}
