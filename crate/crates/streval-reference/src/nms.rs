//! Quadratic suppression, written straight from the definition.

use streval::postprocess::NmsConfig;
use streval::types::{BoundingBox, Detection};

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

/// Keep a detection iff no higher-ranked kept detection (same category
/// when class-aware) overlaps it at IoU >= the threshold. Rank is
/// descending score with ties by input position.
pub fn ref_nms(dets: &[Detection], cfg: &NmsConfig) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score().partial_cmp(&dets[a].score()).unwrap());

    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let mut survives = true;
        for &k in &kept {
            let same_class = dets[k].category() == dets[i].category();
            if (!cfg.class_aware || same_class)
                && box_iou(dets[k].bbox(), dets[i].bbox()) >= cfg.iou_threshold
            {
                survives = false;
                break;
            }
        }
        if survives {
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| dets[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use streval::types::CategoryId;

    fn det(x0: f64, score: f64, cat: usize) -> Detection {
        Detection::new(
            BoundingBox::new(x0, 0.0, x0 + 10.0, 10.0).unwrap(),
            CategoryId(cat),
            score,
        )
        .unwrap()
    }

    #[test]
    fn overlapping_same_class_boxes_collapse() {
        let dets = vec![det(0.0, 0.9, 0), det(0.0, 0.8, 0)];
        let kept = ref_nms(&dets, &NmsConfig::default());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].score(), 0.9);
    }

    #[test]
    fn class_separation_is_respected() {
        let dets = vec![det(0.0, 0.9, 0), det(0.0, 0.8, 1)];
        assert_eq!(ref_nms(&dets, &NmsConfig::default()).len(), 2);
    }
}
