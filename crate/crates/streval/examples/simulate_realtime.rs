//! Discrete-event simulation of a real-time detector: frame drops under
//! load and the effect of the scheduling policy.
//!
//! ```bash
//! cargo run -p streval --example simulate_realtime
//! ```

use streval::sim::{
    ground_truth_detector, simulate, Interpolation, LatencyModel, SchedulePolicy,
};
use streval::types::{BoundingBox, CategoryId, FrameRecord, GroundTruthObject};

const LATENCY_TABLE: &str = "\
# width height latency_us (measured end-to-end inference timings)
1440 2304 28100
1280 2048 21400
1200 1920 20500
1120 1792 19700
960 1536 16000
";

fn main() {
    let frames: Vec<FrameRecord> = (0..150)
        .map(|i| {
            let t = (i as f64 * 1_000_000.0 / 30.0).round() as i64;
            let x = 10.0 + 5.0 * i as f64;
            FrameRecord::new(
                i,
                0,
                t,
                1200,
                1920,
                vec![GroundTruthObject::new(
                    BoundingBox::new(x, 400.0, x + 50.0, 450.0).unwrap(),
                    CategoryId(0),
                    false,
                )],
            )
            .unwrap()
        })
        .collect();

    let model = LatencyModel::from_table_str(LATENCY_TABLE, Interpolation::Nearest, None).unwrap();

    // At the largest input size the detector still beats the 33.3 ms
    // frame period, so a blocking schedule keeps up with 30 FPS.
    let trace = simulate(
        &frames,
        ground_truth_detector,
        &model,
        SchedulePolicy::BlockingLatest,
        (1440, 2304),
    )
    .unwrap();
    println!(
        "blocking-latest @ 1440x2304 ({} us): processed {}, dropped {}, drop rate {:.3}",
        model.latency_for(1440, 2304).unwrap(),
        trace.processed_frames.len(),
        trace.dropped_frames.len(),
        trace.drop_rate()
    );

    // A detector slower than two frame periods has to skip.
    let slow = LatencyModel::from_table_str("1200 1920 70000\n", Interpolation::Nearest, None)
        .unwrap();
    let trace = simulate(
        &frames,
        ground_truth_detector,
        &slow,
        SchedulePolicy::BlockingLatest,
        (1200, 1920),
    )
    .unwrap();
    println!(
        "blocking-latest @ 70 ms: processed {}, dropped {}, first drops {:?}",
        trace.processed_frames.len(),
        trace.dropped_frames.len(),
        &trace.dropped_frames[..4.min(trace.dropped_frames.len())]
    );
    for (i, e) in trace.events.iter().take(3).enumerate() {
        println!(
            "  slot {i}: frame {} emitted at {} us",
            e.source_frame_id, e.emit_time_us
        );
    }

    // Fixed-stride processes every k-th frame and queues behind itself.
    let trace = simulate(
        &frames,
        ground_truth_detector,
        &slow,
        SchedulePolicy::FixedStride(3),
        (1200, 1920),
    )
    .unwrap();
    println!(
        "fixed-stride:3 @ 70 ms: processed {} of {} frames, busy until {} us",
        trace.processed_frames.len(),
        frames.len(),
        trace.busy_intervals.last().map(|b| b.end_us).unwrap_or(0)
    );
}
