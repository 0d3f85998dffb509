//! Discrete-event simulation of a real-time detector over a frame
//! stream: a single detector instance, driven by a resolution-to-latency
//! model, producing timestamped prediction events for the streaming
//! evaluator.

mod latency;

use std::io;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, LogNormal};
use thiserror::Error;

pub use latency::{Interpolation, JitterConfig, LatencyEntry, LatencyModel};

use crate::offline::EvalConfig;
use crate::streaming::{evaluate_streaming, StreamError};
use crate::types::{Detection, EvalResult, FrameRecord, PredictionEvent};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("latency table is empty")]
    EmptyLatencyTable,
    #[error("duplicate pixel count {pixels} in latency table")]
    DuplicatePixelCount { pixels: u64 },
    #[error("invalid latency entry: {reason}")]
    InvalidLatencyEntry { reason: String },
    #[error("pixel count {pixels} outside table span [{min}, {max}] in linear mode")]
    Extrapolation { pixels: u64, min: u64, max: u64 },
    #[error("latency table line {line}: {reason}")]
    TableParse { line: usize, reason: String },
    #[error("fixed stride must be at least 1")]
    InvalidStride,
    #[error("frames out of order in sequence {sequence_id}")]
    FrameOrder { sequence_id: i64 },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Eval(#[from] StreamError),
}

/// How the simulated detector picks frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulePolicy {
    /// On finishing, immediately start on the newest frame already
    /// captured; frames that arrived in between are dropped.
    BlockingLatest,
    /// Process every k-th frame in order regardless of backlog.
    FixedStride(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BusyInterval {
    pub sequence_id: i64,
    pub start_us: i64,
    pub end_us: i64,
}

/// Everything a simulation run produced. Frame indices refer to the
/// input slice; busy intervals are non-overlapping within a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub events: Vec<PredictionEvent>,
    pub processed_frames: Vec<usize>,
    pub dropped_frames: Vec<usize>,
    pub busy_intervals: Vec<BusyInterval>,
}

impl SimTrace {
    pub fn drop_rate(&self) -> f64 {
        let total = self.processed_frames.len() + self.dropped_frames.len();
        if total == 0 {
            0.0
        } else {
            self.dropped_frames.len() as f64 / total as f64
        }
    }
}

/// A detector that emits the ground truth verbatim at full confidence.
/// The standard plug-in oracle for simulator and sweep experiments.
pub fn ground_truth_detector(frame: &FrameRecord) -> Vec<Detection> {
    frame
        .ground_truth
        .iter()
        .filter(|g| !g.ignore)
        .map(|g| Detection::new(g.bbox, g.category, 1.0).expect("unit score is valid"))
        .collect()
}

struct LatencySampler {
    base: i64,
    jitter: Option<(StdRng, LogNormal<f64>)>,
}

impl LatencySampler {
    fn new(model: &LatencyModel, width: u32, height: u32) -> Result<Self, SimError> {
        let base = model.latency_for(width, height)?;
        let jitter = model
            .jitter
            .map(|j| {
                (
                    StdRng::seed_from_u64(j.seed),
                    LogNormal::new(0.0, j.sigma).expect("sigma validated at model construction"),
                )
            });
        Ok(Self { base, jitter })
    }

    fn sample(&mut self) -> i64 {
        match &mut self.jitter {
            None => self.base,
            Some((rng, dist)) => {
                let factor = dist.sample(rng);
                (self.base as f64 * factor).round().max(0.0) as i64
            }
        }
    }
}

/// Run the detector over the frames under the given policy. Sequences are
/// simulated independently (one detector per video, clock starting at the
/// sequence's first capture) and the merged event stream is emit-ordered.
pub fn simulate(
    frames: &[FrameRecord],
    detector: impl Fn(&FrameRecord) -> Vec<Detection>,
    model: &LatencyModel,
    policy: SchedulePolicy,
    input_resolution: (u32, u32),
) -> Result<SimTrace, SimError> {
    if let SchedulePolicy::FixedStride(0) = policy {
        return Err(SimError::InvalidStride);
    }

    // Partition by sequence, preserving input order.
    let mut seq_order: Vec<i64> = Vec::new();
    let mut seqs: Vec<Vec<usize>> = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        match seq_order.iter().position(|&s| s == f.sequence_id) {
            Some(k) => {
                let prev = *seqs[k].last().expect("non-empty sequence bucket");
                if frames[prev].capture_time_us >= f.capture_time_us {
                    return Err(SimError::FrameOrder {
                        sequence_id: f.sequence_id,
                    });
                }
                seqs[k].push(i);
            }
            None => {
                seq_order.push(f.sequence_id);
                seqs.push(vec![i]);
            }
        }
    }

    let mut trace = SimTrace {
        events: Vec::new(),
        processed_frames: Vec::new(),
        dropped_frames: Vec::new(),
        busy_intervals: Vec::new(),
    };

    for (seq_id, indices) in seq_order.iter().zip(&seqs) {
        let mut sampler = LatencySampler::new(model, input_resolution.0, input_resolution.1)?;
        let mut processed = vec![false; indices.len()];
        match policy {
            SchedulePolicy::BlockingLatest => {
                let capture = |k: usize| frames[indices[k]].capture_time_us;
                let mut now = capture(0);
                let mut last: Option<usize> = None;
                loop {
                    // Newest frame captured by `now` (inclusive).
                    let mut candidate = last.unwrap_or(0);
                    while candidate + 1 < indices.len() && capture(candidate + 1) <= now {
                        candidate += 1;
                    }
                    if last == Some(candidate) || capture(candidate) > now {
                        // Nothing new yet: idle until the next arrival.
                        let next = candidate + if last == Some(candidate) { 1 } else { 0 };
                        if next >= indices.len() {
                            break;
                        }
                        now = capture(next);
                        continue;
                    }
                    let latency = sampler.sample();
                    let end = now + latency;
                    let frame = &frames[indices[candidate]];
                    trace.events.push(PredictionEvent {
                        source_frame_id: frame.frame_id,
                        emit_time_us: end,
                        detections: detector(frame),
                    });
                    trace.busy_intervals.push(BusyInterval {
                        sequence_id: *seq_id,
                        start_us: now,
                        end_us: end,
                    });
                    processed[candidate] = true;
                    last = Some(candidate);
                    now = end;
                }
            }
            SchedulePolicy::FixedStride(k) => {
                let mut prev_emit = i64::MIN;
                for (pos, &fi) in indices.iter().enumerate() {
                    if pos % k != 0 {
                        continue;
                    }
                    let frame = &frames[fi];
                    let start = prev_emit.max(frame.capture_time_us);
                    let latency = sampler.sample();
                    let end = start + latency;
                    trace.events.push(PredictionEvent {
                        source_frame_id: frame.frame_id,
                        emit_time_us: end,
                        detections: detector(frame),
                    });
                    trace.busy_intervals.push(BusyInterval {
                        sequence_id: *seq_id,
                        start_us: start,
                        end_us: end,
                    });
                    processed[pos] = true;
                    prev_emit = end;
                }
            }
        }
        for (pos, &fi) in indices.iter().enumerate() {
            if processed[pos] {
                trace.processed_frames.push(fi);
            } else {
                trace.dropped_frames.push(fi);
            }
        }
    }

    trace.processed_frames.sort_unstable();
    trace.dropped_frames.sort_unstable();
    // Merge the per-sequence streams into one emit-ordered stream; the
    // sort is stable so sequences tie-break in first-appearance order.
    trace.events.sort_by_key(|e| e.emit_time_us);
    Ok(trace)
}

/// One row of the latency/accuracy trade-off report.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub width: u32,
    pub height: u32,
    /// Base (jitter-free) latency at this resolution.
    pub latency_us: i64,
    pub eval: EvalResult,
    pub drop_rate: f64,
}

/// Simulate and score each resolution, producing the trade-off table.
pub fn sweep(
    frames: &[FrameRecord],
    detector: impl Fn(&FrameRecord) -> Vec<Detection>,
    model: &LatencyModel,
    policy: SchedulePolicy,
    resolutions: &[(u32, u32)],
    config: &EvalConfig,
) -> Result<Vec<SweepPoint>, SimError> {
    let mut points = Vec::with_capacity(resolutions.len());
    for &(width, height) in resolutions {
        let trace = simulate(frames, &detector, model, policy, (width, height))?;
        let eval = evaluate_streaming(frames, &trace.events, config)?;
        points.push(SweepPoint {
            width,
            height,
            latency_us: model.latency_for(width, height)?,
            eval,
            drop_rate: trace.drop_rate(),
        });
    }
    Ok(points)
}
