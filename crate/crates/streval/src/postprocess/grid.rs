//! Raw detection-head output for one stride level, plus the anchor-free
//! decode and the flat binary dump format used to ingest tensors.

use std::fs;
use std::path::Path;

use super::{PostprocessError, STRIDES};
use crate::types::{BoundingBox, CategoryId, Detection};

/// Channels per cell: dx, dy, dw, dh, objectness, then class scores.
const HEAD_CHANNELS: usize = 5;

/// One stride level of an anchor-free detection head.
///
/// Values are row-major by (row, col, channel). Objectness and class
/// scores must already be in [0, 1]; the box channels are free reals.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    stride: u32,
    rows: usize,
    cols: usize,
    num_classes: usize,
    values: Vec<f64>,
}

impl GridOutput {
    pub fn new(
        stride: u32,
        rows: usize,
        cols: usize,
        num_classes: usize,
        values: Vec<f64>,
    ) -> Result<Self, PostprocessError> {
        if !STRIDES.contains(&stride) {
            return Err(PostprocessError::InvalidStride(stride));
        }
        if rows == 0 || cols == 0 || num_classes == 0 {
            return Err(PostprocessError::Shape {
                expected: 1,
                actual: 0,
            });
        }
        let channels = HEAD_CHANNELS + num_classes;
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(channels))
            .ok_or(PostprocessError::Shape {
                expected: usize::MAX,
                actual: values.len(),
            })?;
        if values.len() != expected {
            return Err(PostprocessError::Shape {
                expected,
                actual: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(PostprocessError::NonFinite { index: i });
            }
            let ch = i % channels;
            if ch >= 4 && !(0.0..=1.0).contains(&v) {
                let channel = if ch == 4 { "objectness" } else { "class score" };
                return Err(PostprocessError::ValueRange {
                    channel,
                    index: i,
                    value: v,
                });
            }
        }
        Ok(Self {
            stride,
            rows,
            cols,
            num_classes,
            values,
        })
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn channels(&self) -> usize {
        HEAD_CHANNELS + self.num_classes
    }

    fn cell(&self, row: usize, col: usize) -> &[f64] {
        let ch = self.channels();
        let start = (row * self.cols + col) * ch;
        &self.values[start..start + ch]
    }

    /// Parse the flat binary dump format: a header of five little-endian
    /// u32 (stride, rows, cols, classes, reserved = 0) followed by the
    /// row-major payload as little-endian f32.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PostprocessError> {
        const HEADER: usize = 20;
        if bytes.len() < HEADER {
            return Err(PostprocessError::Header {
                reason: format!("file too short for header: {} bytes", bytes.len()),
            });
        }
        let word = |i: usize| {
            u32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().expect("4-byte slice"))
        };
        let (stride, rows, cols, classes, reserved) =
            (word(0), word(1), word(2), word(3), word(4));
        if reserved != 0 {
            return Err(PostprocessError::Header {
                reason: format!("reserved header word must be 0, got {reserved}"),
            });
        }
        let rows = rows as usize;
        let cols = cols as usize;
        let classes = classes as usize;
        let count = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(HEAD_CHANNELS + classes))
            .ok_or(PostprocessError::Header {
                reason: "grid dimensions overflow".into(),
            })?;
        let payload = bytes.len() - HEADER;
        if !payload.is_multiple_of(4) || payload / 4 != count {
            return Err(PostprocessError::Header {
                reason: format!(
                    "payload is {payload} bytes, expected {} for a {rows}x{cols} grid with {classes} classes",
                    count.saturating_mul(4)
                ),
            });
        }
        let values: Vec<f64> = bytes[HEADER..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
            .collect();
        Self::new(stride, rows, cols, classes, values)
    }

    /// Serialize to the flat binary dump format. Values are narrowed to
    /// f32, matching the wire contract.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + self.values.len() * 4);
        for w in [
            self.stride,
            self.rows as u32,
            self.cols as u32,
            self.num_classes as u32,
            0u32,
        ] {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for &v in &self.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, PostprocessError> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), PostprocessError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}

/// Anchor-free decode of one grid: per cell and class,
/// `center = (cell + offset) * stride`, `size = exp(dwh) * stride`,
/// `score = objectness * class_score`. Only entries with score >=
/// `score_threshold` survive. Emission order is row-major then class
/// index.
pub fn decode_grid(
    grid: &GridOutput,
    score_threshold: f64,
) -> Result<Vec<Detection>, PostprocessError> {
    let stride = grid.stride as f64;
    let mut out = Vec::new();
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let cell = grid.cell(row, col);
            let (dx, dy, dw, dh, obj) = (cell[0], cell[1], cell[2], cell[3], cell[4]);
            let cx = (col as f64 + dx) * stride;
            let cy = (row as f64 + dy) * stride;
            let w = dw.exp() * stride;
            let h = dh.exp() * stride;
            for (c, &cls) in cell[HEAD_CHANNELS..].iter().enumerate() {
                let score = obj * cls;
                if score < score_threshold {
                    continue;
                }
                let bbox = BoundingBox::new(
                    cx - w / 2.0,
                    cy - h / 2.0,
                    cx + w / 2.0,
                    cy + h / 2.0,
                )
                .map_err(|e| PostprocessError::InvalidBox(e.to_string()))?;
                let det = Detection::new(bbox, CategoryId(c), score)
                    .map_err(|e| PostprocessError::InvalidBox(e.to_string()))?;
                out.push(det);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_with(stride: u32, rows: usize, cols: usize, classes: usize, cells: &[(usize, usize, [f64; 5], Vec<f64>)]) -> GridOutput {
        let ch = HEAD_CHANNELS + classes;
        let mut values = vec![0.0; rows * cols * ch];
        for (row, col, head, cls) in cells {
            let start = (row * cols + col) * ch;
            values[start..start + 5].copy_from_slice(head);
            values[start + 5..start + ch].copy_from_slice(cls);
        }
        GridOutput::new(stride, rows, cols, classes, values).unwrap()
    }

    #[test]
    fn unit_cell_decodes_to_centered_stride_box() {
        let g = grid_with(8, 1, 1, 1, &[(0, 0, [0.5, 0.5, 0.0, 0.0, 1.0], vec![1.0])]);
        let d = decode_grid(&g, 0.01).unwrap();
        assert_eq!(d.len(), 1);
        let b = d[0].bbox();
        assert_eq!((b.x_min(), b.y_min(), b.x_max(), b.y_max()), (0.0, 0.0, 8.0, 8.0));
        assert_eq!(d[0].score(), 1.0);
    }

    #[test]
    fn log_size_doubles_under_ln_two() {
        let ln2 = std::f64::consts::LN_2;
        let g = grid_with(16, 2, 2, 1, &[(1, 1, [0.5, 0.5, ln2, ln2, 1.0], vec![1.0])]);
        let d = decode_grid(&g, 0.01).unwrap();
        assert_eq!(d.len(), 1);
        let b = d[0].bbox();
        assert_eq!(b.width(), 32.0);
        assert_eq!(b.height(), 32.0);
        // Cell (1, 1) at stride 16 centers at (24, 24).
        assert_eq!(b.x_min(), 24.0 - 16.0);
        assert_eq!(b.y_max(), 24.0 + 16.0);
    }

    #[test]
    fn score_threshold_filters_entries() {
        let g = grid_with(8, 1, 1, 2, &[(0, 0, [0.5, 0.5, 0.0, 0.0, 0.5], vec![0.9, 0.1])]);
        // Scores are 0.45 and 0.05.
        let d = decode_grid(&g, 0.1).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].category(), CategoryId(0));
        let d = decode_grid(&g, 0.01).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn channel_count_mismatch_is_rejected() {
        let err = GridOutput::new(8, 2, 2, 1, vec![0.0; 23]).unwrap_err();
        assert!(matches!(err, PostprocessError::Shape { expected: 24, actual: 23 }));
    }

    #[test]
    fn probability_channels_must_be_unit_interval() {
        let mut values = vec![0.0; 6];
        values[4] = 1.5;
        assert!(matches!(
            GridOutput::new(8, 1, 1, 1, values),
            Err(PostprocessError::ValueRange { .. })
        ));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut values = vec![0.0; 6];
        values[2] = f64::NAN;
        assert!(matches!(
            GridOutput::new(8, 1, 1, 1, values),
            Err(PostprocessError::NonFinite { index: 2 })
        ));
    }

    #[test]
    fn binary_dump_round_trips() {
        let g = grid_with(
            32,
            2,
            3,
            2,
            &[
                (0, 1, [0.25, -0.5, 0.125, 1.0, 0.5], vec![0.75, 0.25]),
                (1, 2, [0.0, 0.5, -1.5, 0.25, 1.0], vec![0.0, 1.0]),
            ],
        );
        let bytes = g.to_bytes();
        let back = GridOutput::from_bytes(&bytes).unwrap();
        // All values above are exactly representable in f32.
        assert_eq!(back, g);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn truncated_or_corrupt_dumps_are_rejected() {
        let g = grid_with(8, 1, 1, 1, &[(0, 0, [0.5, 0.5, 0.0, 0.0, 1.0], vec![1.0])]);
        let bytes = g.to_bytes();
        assert!(GridOutput::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(GridOutput::from_bytes(&bytes[..10]).is_err());

        let mut trailing = bytes.clone();
        trailing.extend_from_slice(&[0, 0, 0, 0]);
        assert!(GridOutput::from_bytes(&trailing).is_err());

        let mut bad_reserved = bytes.clone();
        bad_reserved[16] = 7;
        assert!(matches!(
            GridOutput::from_bytes(&bad_reserved),
            Err(PostprocessError::Header { .. })
        ));

        let mut bad_stride = bytes;
        bad_stride[0] = 9;
        assert!(matches!(
            GridOutput::from_bytes(&bad_stride),
            Err(PostprocessError::InvalidStride(9))
        ));
    }

    #[test]
    fn decode_count_is_bounded_and_scores_valid() {
        let rows = 3;
        let cols = 4;
        let classes = 5;
        let ch = HEAD_CHANNELS + classes;
        let mut values = vec![0.0; rows * cols * ch];
        for (i, v) in values.iter_mut().enumerate() {
            let c = i % ch;
            *v = match c {
                0 | 1 => 0.3,
                2 | 3 => -0.2,
                _ => 0.7,
            };
        }
        let g = GridOutput::new(64, rows, cols, classes, values).unwrap();
        let d = decode_grid(&g, 0.0001).unwrap();
        assert!(d.len() <= rows * cols * classes);
        assert!(d.iter().all(|x| (0.0..=1.0).contains(&x.score())));
    }
}
