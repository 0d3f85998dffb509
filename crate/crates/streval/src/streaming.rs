//! Latency-aware evaluation: pair each frame with the most recent
//! prediction available at its capture instant, then score the
//! re-associated pairs with the offline metric.

use std::collections::HashMap;

use thiserror::Error;

use crate::offline::{evaluate_offline, EvalConfig, EvalError};
use crate::types::{Detection, EvalResult, FrameRecord, PredictionEvent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StreamError {
    #[error("frames out of order in sequence {sequence_id} at frame {frame_id}")]
    FrameOrder { sequence_id: i64, frame_id: i64 },
    #[error("prediction stream emit times out of order at event {index}")]
    EventOrder { index: usize },
    #[error("duplicate frame id {frame_id}")]
    DuplicateFrame { frame_id: i64 },
    #[error("prediction event {index} references unknown frame {frame_id}")]
    UnknownSourceFrame { index: usize, frame_id: i64 },
    #[error(
        "prediction event {index} emitted at {emit_time_us} before its source frame \
         {frame_id} was captured at {capture_time_us}"
    )]
    CausalityViolation {
        index: usize,
        frame_id: i64,
        emit_time_us: i64,
        capture_time_us: i64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The prediction chosen for one frame. `staleness_us` is the frame's
/// capture time minus the chosen prediction's emit time, always >= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePairing {
    pub frame_id: i64,
    pub event_index: Option<usize>,
    pub staleness_us: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamAssociation {
    /// One pairing per input frame, in input order.
    pub pairings: Vec<FramePairing>,
}

impl StreamAssociation {
    pub fn paired_count(&self) -> usize {
        self.pairings.iter().filter(|p| p.event_index.is_some()).count()
    }

    pub fn mean_staleness_us(&self) -> Option<f64> {
        let stale: Vec<i64> = self.pairings.iter().filter_map(|p| p.staleness_us).collect();
        if stale.is_empty() {
            None
        } else {
            Some(stale.iter().sum::<i64>() as f64 / stale.len() as f64)
        }
    }

    pub fn max_staleness_us(&self) -> Option<i64> {
        self.pairings.iter().filter_map(|p| p.staleness_us).max()
    }
}

/// For each frame, select the prediction event with the largest emit time
/// <= the frame's capture time (inclusive at equality). Frames captured
/// before every emission get no prediction. The stream is partitioned by
/// the source frame's sequence; predictions never flow between videos.
pub fn associate(
    frames: &[FrameRecord],
    stream: &[PredictionEvent],
) -> Result<StreamAssociation, StreamError> {
    for (i, w) in stream.windows(2).enumerate() {
        if w[1].emit_time_us < w[0].emit_time_us {
            return Err(StreamError::EventOrder { index: i + 1 });
        }
    }

    // frame id -> (input index, sequence, capture time)
    let mut by_id: HashMap<i64, usize> = HashMap::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        if by_id.insert(f.frame_id, i).is_some() {
            return Err(StreamError::DuplicateFrame {
                frame_id: f.frame_id,
            });
        }
    }

    // Partition frames by sequence, preserving input order, and verify
    // capture times strictly increase within each sequence.
    let mut seq_frames: HashMap<i64, Vec<usize>> = HashMap::new();
    let mut seq_order: Vec<i64> = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let entry = seq_frames.entry(f.sequence_id).or_insert_with(|| {
            seq_order.push(f.sequence_id);
            Vec::new()
        });
        if let Some(&prev) = entry.last() {
            if frames[prev].capture_time_us >= f.capture_time_us {
                return Err(StreamError::FrameOrder {
                    sequence_id: f.sequence_id,
                    frame_id: f.frame_id,
                });
            }
        }
        entry.push(i);
    }

    // Partition events by the sequence of their source frame, keeping
    // stream order, and verify causality against the source frame.
    let mut seq_events: HashMap<i64, Vec<usize>> = HashMap::new();
    for (ei, ev) in stream.iter().enumerate() {
        let &fi = by_id
            .get(&ev.source_frame_id)
            .ok_or(StreamError::UnknownSourceFrame {
                index: ei,
                frame_id: ev.source_frame_id,
            })?;
        let frame = &frames[fi];
        if ev.emit_time_us < frame.capture_time_us {
            return Err(StreamError::CausalityViolation {
                index: ei,
                frame_id: ev.source_frame_id,
                emit_time_us: ev.emit_time_us,
                capture_time_us: frame.capture_time_us,
            });
        }
        seq_events.entry(frame.sequence_id).or_default().push(ei);
    }

    let mut pairings: Vec<Option<FramePairing>> = vec![None; frames.len()];
    for &seq in &seq_order {
        let f_idx = &seq_frames[&seq];
        let empty = Vec::new();
        let e_idx = seq_events.get(&seq).unwrap_or(&empty);
        let mut ptr = 0usize;
        let mut current: Option<usize> = None;
        for &fi in f_idx {
            let t = frames[fi].capture_time_us;
            // Advance through every event available by t; on emit-time
            // ties the latest event in stream order wins.
            while ptr < e_idx.len() && stream[e_idx[ptr]].emit_time_us <= t {
                current = Some(e_idx[ptr]);
                ptr += 1;
            }
            pairings[fi] = Some(FramePairing {
                frame_id: frames[fi].frame_id,
                event_index: current,
                staleness_us: current.map(|ei| t - stream[ei].emit_time_us),
            });
        }
    }

    Ok(StreamAssociation {
        pairings: pairings.into_iter().map(Option::unwrap).collect(),
    })
}

/// Streaming evaluation: associate, then delegate to the offline metric
/// with the re-associated per-frame detections.
pub fn evaluate_streaming(
    frames: &[FrameRecord],
    stream: &[PredictionEvent],
    config: &EvalConfig,
) -> Result<EvalResult, StreamError> {
    let assoc = associate(frames, stream)?;
    let mut predictions: HashMap<i64, Vec<Detection>> = HashMap::new();
    for p in &assoc.pairings {
        if let Some(ei) = p.event_index {
            predictions.insert(p.frame_id, stream[ei].detections.clone());
        }
    }
    Ok(evaluate_offline(frames, &predictions, config)?)
}
