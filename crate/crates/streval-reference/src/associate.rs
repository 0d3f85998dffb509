//! Linear-scan temporal association: for each frame, scan every event and
//! take the freshest one available at the frame's capture instant.

use streval::types::{FrameRecord, PredictionEvent};

/// Chosen event index and staleness per frame, in frame order. Events
/// pair only within the sequence of their source frame; emit-time ties
/// resolve to the latest event in stream order.
pub fn ref_associate(
    frames: &[FrameRecord],
    stream: &[PredictionEvent],
) -> Vec<(Option<usize>, Option<i64>)> {
    let sequence_of = |frame_id: i64| {
        frames
            .iter()
            .find(|f| f.frame_id == frame_id)
            .map(|f| f.sequence_id)
    };
    frames
        .iter()
        .map(|f| {
            let mut best: Option<usize> = None;
            for (ei, e) in stream.iter().enumerate() {
                if sequence_of(e.source_frame_id) != Some(f.sequence_id) {
                    continue;
                }
                if e.emit_time_us > f.capture_time_us {
                    continue;
                }
                best = match best {
                    None => Some(ei),
                    // `>=` lets a later event with an equal emit time win.
                    Some(b) if e.emit_time_us >= stream[b].emit_time_us => Some(ei),
                    keep => keep,
                };
            }
            (
                best,
                best.map(|ei| f.capture_time_us - stream[ei].emit_time_us),
            )
        })
        .collect()
}
