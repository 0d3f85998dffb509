//! Greedy non-maximum suppression, class-aware by default.

use super::{NmsConfig, PostprocessError};
use crate::matching::iou;
use crate::types::Detection;

/// Suppress lower-scored boxes overlapping an already-kept box at IoU >=
/// the threshold. Input order does not matter: detections are sorted by
/// descending score (stable on ties) and the output preserves kept order.
///
/// `cfg.score_threshold` is not applied here; it gates decoding.
pub fn nms(dets: &[Detection], cfg: &NmsConfig) -> Result<Vec<Detection>, PostprocessError> {
    cfg.validate()?;
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score().partial_cmp(&dets[a].score()).unwrap());

    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let suppressed = kept.iter().any(|&k| {
            (!cfg.class_aware || dets[k].category() == dets[i].category())
                && iou(dets[k].bbox(), dets[i].bbox()) >= cfg.iou_threshold
        });
        if !suppressed {
            kept.push(i);
        }
    }
    Ok(kept.into_iter().map(|i| dets[i].clone()).collect())
}
