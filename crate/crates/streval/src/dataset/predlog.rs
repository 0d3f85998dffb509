//! Line-delimited prediction log: one header line `frame_id emit_time_us
//! n` per event followed by `n` detection lines `category score x_min
//! y_min x_max y_max`. `#` comments and blank lines are allowed anywhere.

use std::fs;
use std::path::Path;

use super::DatasetError;
use crate::types::{BoundingBox, CategoryId, Detection, PredictionEvent};

pub fn load_prediction_log(path: &Path) -> Result<Vec<PredictionEvent>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_prediction_log(&text)
}

pub fn parse_prediction_log(text: &str) -> Result<Vec<PredictionEvent>, DatasetError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut events: Vec<PredictionEvent> = Vec::new();
    let mut prev_emit: Option<(i64, usize)> = None;
    while let Some((lineno, header)) = lines.next() {
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(DatasetError::LogParse {
                line: lineno,
                reason: format!(
                    "expected event header `frame_id emit_time_us n`, got {} fields",
                    fields.len()
                ),
            });
        }
        let source_frame_id: i64 = fields[0].parse().map_err(|_| DatasetError::LogParse {
            line: lineno,
            reason: format!("bad frame id {:?}", fields[0]),
        })?;
        let emit_time_us: i64 = fields[1].parse().map_err(|_| DatasetError::LogParse {
            line: lineno,
            reason: format!("bad emit time {:?}", fields[1]),
        })?;
        let n: usize = fields[2].parse().map_err(|_| DatasetError::LogParse {
            line: lineno,
            reason: format!("bad detection count {:?}", fields[2]),
        })?;
        if let Some((p, _)) = prev_emit {
            if emit_time_us < p {
                return Err(DatasetError::LogOrder { line: lineno });
            }
        }
        prev_emit = Some((emit_time_us, lineno));

        // Capacity comes from untrusted input; let it grow instead.
        let mut detections = Vec::new();
        for _ in 0..n {
            let (dlineno, detail) = lines.next().ok_or(DatasetError::LogParse {
                line: lineno,
                reason: format!("event promises {n} detections but the log ends early"),
            })?;
            let f: Vec<&str> = detail.split_whitespace().collect();
            if f.len() != 6 {
                return Err(DatasetError::LogParse {
                    line: dlineno,
                    reason: format!(
                        "expected `category score x_min y_min x_max y_max`, got {} fields",
                        f.len()
                    ),
                });
            }
            let parse_f64 = |s: &str, what: &str| -> Result<f64, DatasetError> {
                s.parse().map_err(|_| DatasetError::LogParse {
                    line: dlineno,
                    reason: format!("bad {what} {s:?}"),
                })
            };
            let category: usize = f[0].parse().map_err(|_| DatasetError::LogParse {
                line: dlineno,
                reason: format!("bad category {:?}", f[0]),
            })?;
            let score = parse_f64(f[1], "score")?;
            let bbox = BoundingBox::new(
                parse_f64(f[2], "x_min")?,
                parse_f64(f[3], "y_min")?,
                parse_f64(f[4], "x_max")?,
                parse_f64(f[5], "y_max")?,
            )
            .map_err(|e| DatasetError::LogParse {
                line: dlineno,
                reason: e.to_string(),
            })?;
            let det = Detection::new(bbox, CategoryId(category), score).map_err(|e| {
                DatasetError::LogParse {
                    line: dlineno,
                    reason: e.to_string(),
                }
            })?;
            detections.push(det);
        }
        events.push(PredictionEvent {
            source_frame_id,
            emit_time_us,
            detections,
        });
    }
    Ok(events)
}

/// Canonical text form: floats use the shortest representation that
/// round-trips exactly, so write-then-read is the identity.
pub fn format_prediction_log(events: &[PredictionEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&format!(
            "{} {} {}\n",
            e.source_frame_id,
            e.emit_time_us,
            e.detections.len()
        ));
        for d in &e.detections {
            let b = d.bbox();
            out.push_str(&format!(
                "{} {} {} {} {} {}\n",
                d.category().0,
                d.score(),
                b.x_min(),
                b.y_min(),
                b.x_max(),
                b.y_max()
            ));
        }
    }
    out
}

pub fn write_prediction_log(path: &Path, events: &[PredictionEvent]) -> Result<(), DatasetError> {
    fs::write(path, format_prediction_log(events)).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
