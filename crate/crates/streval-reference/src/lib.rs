//! Brute-force reference implementations used only by tests to anchor the
//! production evaluators, suppression and decoding in `streval`.
//!
//! Everything here is written for definitional transparency, not speed,
//! and shares only the domain types with the production crate.

use thiserror::Error;

pub mod associate;
pub mod decode;
pub mod eval;
pub mod nms;

pub use associate::ref_associate;
pub use decode::ref_decode_grid;
pub use eval::ref_ap;
pub use nms::ref_nms;

/// Largest instance the quadratic/cubic reference paths accept.
pub const MAX_BOXES: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("instance too large for the brute-force path: {count} boxes > {max}")]
    TooLarge { count: usize, max: usize },
}
