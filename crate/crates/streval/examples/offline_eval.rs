//! Offline AP over a small synthetic scene.
//!
//! ```bash
//! cargo run -p streval --example offline_eval
//! ```

use std::collections::HashMap;

use streval::offline::{evaluate_offline, pr_curve, EvalConfig};
use streval::types::{BoundingBox, CategoryId, Detection, FrameRecord, GroundTruthObject};

fn main() {
    let car = CategoryId(0);
    let person = CategoryId(1);

    // Two frames with three annotated objects.
    let frames = vec![
        FrameRecord::new(
            0,
            0,
            0,
            1920,
            1200,
            vec![
                GroundTruthObject::new(bx(100.0, 100.0, 400.0, 300.0), car, false),
                GroundTruthObject::new(bx(900.0, 200.0, 960.0, 380.0), person, false),
            ],
        )
        .unwrap(),
        FrameRecord::new(
            1,
            0,
            33_333,
            1920,
            1200,
            vec![GroundTruthObject::new(bx(120.0, 100.0, 420.0, 300.0), car, false)],
        )
        .unwrap(),
    ];

    // Detections: one tight hit, one loose hit, one false positive.
    let mut predictions = HashMap::new();
    predictions.insert(
        0,
        vec![
            Detection::new(bx(102.0, 98.0, 398.0, 305.0), car, 0.95).unwrap(),
            Detection::new(bx(905.0, 210.0, 958.0, 370.0), person, 0.80).unwrap(),
            Detection::new(bx(1500.0, 800.0, 1600.0, 900.0), car, 0.30).unwrap(),
        ],
    );
    predictions.insert(
        1,
        vec![Detection::new(bx(140.0, 110.0, 430.0, 310.0), car, 0.90).unwrap()],
    );

    let config = EvalConfig::default();
    let result = evaluate_offline(&frames, &predictions, &config).unwrap();

    println!("offline evaluation over {} frames", frames.len());
    println!("  AP        {:.3}", result.ap);
    println!("  AP50      {:.3}", result.ap50);
    println!("  AP75      {:.3}", result.ap75);
    println!("  AP_small  {:.3}", result.ap_small);
    println!("  AP_medium {:.3}", result.ap_medium);
    println!("  AP_large  {:.3}", result.ap_large);
    for (cat, ap) in &result.per_category_ap {
        println!("  category {cat}: AP {ap:.3}");
    }

    // The intermediate curve for the car category at IoU 0.5.
    let all_dets: Vec<Detection> = predictions.values().flatten().cloned().collect();
    let all_gts: Vec<GroundTruthObject> =
        frames.iter().flat_map(|f| f.ground_truth.clone()).collect();
    let curve = pr_curve(&all_dets, &all_gts, 0.5, car, 11).unwrap();
    println!("\npooled PR curve, car @ IoU 0.5 (11 recall points):");
    for (r, p) in curve.recalls.iter().zip(&curve.interpolated_precisions) {
        println!("  recall {r:.1} -> precision {p:.3}");
    }
}

fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
    BoundingBox::new(x0, y0, x1, y1).unwrap()
}
