//! From raw head grids to image-space detections: decode, suppress, and
//! undo the letterbox in one fused call.
//!
//! ```bash
//! cargo run -p streval --example postprocess_pipeline
//! ```

use streval::postprocess::{
    decode_grid, fused_pipeline, nms, GridOutput, LetterboxTransform, NmsConfig, STRIDES,
};

fn main() {
    // Four grid levels for a 640x640 network input. Each level gets one
    // confident cell plus a slightly weaker duplicate for NMS to remove.
    let classes = 2;
    let grids: Vec<GridOutput> = STRIDES
        .iter()
        .map(|&stride| {
            let n = (640 / stride) as usize;
            let mut values = vec![0.0; n * n * (5 + classes)];
            // Values chosen to be exactly representable in f32 so the
            // binary dump below round-trips bit-for-bit.
            let mut put = |row: usize, col: usize, obj: f64, cls0: f64| {
                let base = (row * n + col) * (5 + classes);
                values[base] = 0.5; // dx
                values[base + 1] = 0.5; // dy
                values[base + 2] = 0.375; // dw
                values[base + 3] = 0.375; // dh
                values[base + 4] = obj;
                values[base + 5] = cls0;
            };
            put(n / 2, n / 2, 0.9375, 0.875);
            if n > 1 {
                put(n / 2, n / 2 - 1, 0.8125, 0.875); // overlapping, weaker
            }
            GridOutput::new(stride, n, n, classes, values).unwrap()
        })
        .collect();

    let decoded: usize = grids
        .iter()
        .map(|g| decode_grid(g, 0.01).unwrap().len())
        .sum();
    println!("decoded {decoded} raw detections from {} grids", grids.len());

    let cfg = NmsConfig::default();
    let all: Vec<_> = grids
        .iter()
        .flat_map(|g| decode_grid(g, cfg.score_threshold).unwrap())
        .collect();
    let kept = nms(&all, &cfg).unwrap();
    println!("{} survive class-aware NMS at IoU {}", kept.len(), cfg.iou_threshold);

    // A 1920x1200 camera image letterboxed into the 640x640 input.
    let lt = LetterboxTransform::new((1920, 1200), (640, 640)).unwrap();
    println!(
        "letterbox: scale {:.4}, padding ({:.1}, {:.1})",
        lt.scale(),
        lt.padding().0,
        lt.padding().1
    );

    let detections = fused_pipeline(&grids, &lt, &cfg).unwrap();
    println!("\nimage-space detections (category score box):");
    for d in &detections {
        let b = d.bbox();
        println!(
            "  {} {:.3} ({:7.1}, {:7.1}) .. ({:7.1}, {:7.1})",
            d.category(),
            d.score(),
            b.x_min(),
            b.y_min(),
            b.x_max(),
            b.y_max()
        );
    }

    // The same grids survive a trip through the binary dump format.
    let bytes = grids[0].to_bytes();
    let back = GridOutput::from_bytes(&bytes).unwrap();
    println!(
        "\nbinary dump: stride-{} grid serializes to {} bytes and reloads identically: {}",
        back.stride(),
        bytes.len(),
        back == grids[0]
    );
}
