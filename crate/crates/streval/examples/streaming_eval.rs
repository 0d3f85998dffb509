//! Streaming vs offline AP: the same detections scored with and without
//! latency accounting, plus a prediction-log round trip.
//!
//! ```bash
//! cargo run -p streval --example streaming_eval
//! ```

use std::collections::HashMap;

use streval::dataset::{format_prediction_log, parse_prediction_log};
use streval::offline::{evaluate_offline, EvalConfig};
use streval::streaming::{associate, evaluate_streaming};
use streval::types::{BoundingBox, CategoryId, Detection, FrameRecord, GroundTruthObject, PredictionEvent};

fn main() {
    // A 30 FPS sequence with one box moving 5 px per frame.
    let frames: Vec<FrameRecord> = (0..90)
        .map(|i| {
            let t = (i as f64 * 1_000_000.0 / 30.0).round() as i64;
            let x = 10.0 + 5.0 * i as f64;
            FrameRecord::new(
                i,
                0,
                t,
                1920,
                1200,
                vec![GroundTruthObject::new(
                    BoundingBox::new(x, 400.0, x + 50.0, 450.0).unwrap(),
                    CategoryId(0),
                    false,
                )],
            )
            .unwrap()
        })
        .collect();

    // A perfect per-frame detector...
    let perfect: HashMap<i64, Vec<Detection>> = frames
        .iter()
        .map(|f| {
            let dets = f
                .ground_truth
                .iter()
                .map(|g| Detection::new(g.bbox, g.category, 0.9).unwrap())
                .collect();
            (f.frame_id, dets)
        })
        .collect();

    // ...whose results become available 40 ms after each capture.
    let latency_us = 40_000;
    let stream: Vec<PredictionEvent> = frames
        .iter()
        .map(|f| PredictionEvent {
            source_frame_id: f.frame_id,
            emit_time_us: f.capture_time_us + latency_us,
            detections: perfect[&f.frame_id].clone(),
        })
        .collect();

    let config = EvalConfig::default();
    let offline = evaluate_offline(&frames, &perfect, &config).unwrap();
    let streaming = evaluate_streaming(&frames, &stream, &config).unwrap();

    let assoc = associate(&frames, &stream).unwrap();
    println!("same detector, same detections:");
    println!("  offline AP    {:.3}  (latency ignored)", offline.ap);
    println!(
        "  streaming AP  {:.3}  (each frame scored against what was available)",
        streaming.ap
    );
    println!(
        "  paired frames {} / {}, staleness mean {:.0} us, max {} us",
        assoc.paired_count(),
        frames.len(),
        assoc.mean_staleness_us().unwrap_or(0.0),
        assoc.max_staleness_us().unwrap_or(0)
    );

    // The stream serializes to a line-delimited log and back, unchanged.
    let text = format_prediction_log(&stream);
    let reloaded = parse_prediction_log(&text).unwrap();
    assert_eq!(reloaded, stream);
    println!(
        "\nprediction log round trip: {} events, {} bytes, identical after reload",
        stream.len(),
        text.len()
    );
}
