//! Annotation and prediction-log ingest plus taxonomy unification across
//! heterogeneous datasets.

mod classmap;
mod coco;
mod predlog;

use std::collections::BTreeMap;
use std::io;

use thiserror::Error;

pub use classmap::{remap, ClassMap, ClassMapRule, MapTarget, RemapReport, RuleCount};
pub use coco::{load_coco_annotations, write_coco_annotations};
pub use predlog::{
    format_prediction_log, load_prediction_log, parse_prediction_log, write_prediction_log,
};

use crate::types::{CategoryId, DomainError, FrameRecord};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("prediction log line {line}: {reason}")]
    LogParse { line: usize, reason: String },
    #[error("prediction log line {line}: emit times must be non-decreasing")]
    LogOrder { line: usize },
    #[error("class map line {line}: {reason}")]
    ClassMapParse { line: usize, reason: String },
    #[error("class map has no rule for source classes: {}", unmapped.join(", "))]
    Coverage { unmapped: Vec<String> },
    #[error("class map rule targets unknown class {target:?} (from {source_class:?})")]
    UnknownTargetClass { source_class: String, target: String },
    #[error("fps must be positive, got {0}")]
    InvalidFps(f64),
}

impl From<DomainError> for DatasetError {
    fn from(e: DomainError) -> Self {
        DatasetError::Validation(e.to_string())
    }
}

/// Category names, indexed by [`CategoryId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryTable {
    names: Vec<String>,
}

impl CategoryTable {
    pub fn new(names: Vec<String>) -> Result<Self, DatasetError> {
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(DatasetError::Validation(
                    "category names must be non-empty".into(),
                ));
            }
            if !seen.insert(n.clone()) {
                return Err(DatasetError::Validation(format!(
                    "duplicate category name {n:?}"
                )));
            }
        }
        Ok(Self { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id_of(&self, name: &str) -> Option<CategoryId> {
        self.names.iter().position(|n| n == name).map(CategoryId)
    }

    pub fn name_of(&self, id: CategoryId) -> Option<&str> {
        self.names.get(id.0).map(String::as_str)
    }

    /// Parse a table file: one category name per line, `#` comments and
    /// blank lines allowed.
    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let names = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        Self::new(names)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }
}

/// A loaded dataset: the category table, frames grouped by sequence, and
/// the nominal frame rate used when capture times were synthesized.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub category_table: CategoryTable,
    pub sequences: BTreeMap<i64, Vec<FrameRecord>>,
    pub fps: f64,
    /// Original image file names, kept so annotation files can be written
    /// back out.
    pub file_names: BTreeMap<i64, String>,
}

impl DatasetBundle {
    /// All frames flattened in (sequence, time) order.
    pub fn flatten(&self) -> Vec<FrameRecord> {
        self.sequences.values().flatten().cloned().collect()
    }

    pub fn frame_count(&self) -> usize {
        self.sequences.values().map(Vec::len).sum()
    }

    pub fn object_count(&self) -> usize {
        self.sequences
            .values()
            .flatten()
            .map(|f| f.ground_truth.len())
            .sum()
    }

    /// Re-check every frame invariant; used by ingest fuzzing to assert
    /// that no invalid bundle can escape the loader.
    pub fn revalidate(&self) -> Result<(), DatasetError> {
        for (seq, frames) in &self.sequences {
            let mut prev: Option<i64> = None;
            for f in frames {
                if f.sequence_id != *seq {
                    return Err(DatasetError::Validation(format!(
                        "frame {} filed under sequence {seq} but records {}",
                        f.frame_id, f.sequence_id
                    )));
                }
                if f.width == 0 || f.height == 0 {
                    return Err(DatasetError::Validation(format!(
                        "frame {} has empty dimensions",
                        f.frame_id
                    )));
                }
                if let Some(p) = prev {
                    if f.capture_time_us <= p {
                        return Err(DatasetError::Validation(format!(
                            "capture times not strictly increasing in sequence {seq}"
                        )));
                    }
                }
                prev = Some(f.capture_time_us);
                for g in &f.ground_truth {
                    if g.category.0 >= self.category_table.len() {
                        return Err(DatasetError::Validation(format!(
                            "frame {} references category {} outside the table",
                            f.frame_id, g.category
                        )));
                    }
                    // BoundingBox validity is guaranteed by construction;
                    // re-assert the numeric invariants anyway.
                    let b = g.bbox;
                    if !(b.x_min().is_finite() && b.y_max().is_finite())
                        || b.x_max() < b.x_min()
                        || b.y_max() < b.y_min()
                    {
                        return Err(DatasetError::Validation(format!(
                            "frame {} holds an invalid box",
                            f.frame_id
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
