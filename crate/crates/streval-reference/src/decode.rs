//! Per-cell decode loop over raw grid values, independent of the
//! production grid type's internals.

use streval::types::{BoundingBox, CategoryId, Detection};

/// Decode a flat row-major (row, col, channel) value buffer with channels
/// `(dx, dy, dw, dh, objectness, class scores...)`.
pub fn ref_decode_grid(
    values: &[f64],
    stride: u32,
    rows: usize,
    cols: usize,
    num_classes: usize,
    score_threshold: f64,
) -> Vec<Detection> {
    let channels = 5 + num_classes;
    assert_eq!(values.len(), rows * cols * channels);
    let s = stride as f64;
    let mut out = Vec::new();
    for row in 0..rows {
        for col in 0..cols {
            let base = (row * cols + col) * channels;
            let dx = values[base];
            let dy = values[base + 1];
            let dw = values[base + 2];
            let dh = values[base + 3];
            let obj = values[base + 4];
            for c in 0..num_classes {
                let score = obj * values[base + 5 + c];
                if score < score_threshold {
                    continue;
                }
                let cx = (col as f64 + dx) * s;
                let cy = (row as f64 + dy) * s;
                let w = dw.exp() * s;
                let h = dh.exp() * s;
                let bbox =
                    BoundingBox::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
                        .expect("finite grid values decode to a valid box");
                out.push(Detection::new(bbox, CategoryId(c), score).expect("score in [0, 1]"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_cell_decodes_to_stride_box() {
        let mut values = vec![0.0; 6];
        values[0] = 0.5;
        values[1] = 0.5;
        values[4] = 1.0;
        values[5] = 1.0;
        let d = ref_decode_grid(&values, 8, 1, 1, 1, 0.01);
        assert_eq!(d.len(), 1);
        let b = d[0].bbox();
        assert_eq!(
            (b.x_min(), b.y_min(), b.x_max(), b.y_max()),
            (0.0, 0.0, 8.0, 8.0)
        );
    }
}
