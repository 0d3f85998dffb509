//! Resolution-to-latency model sampled from measured inference timings,
//! with nearest or linear-in-pixel-count interpolation and optional
//! seeded lognormal jitter.

use std::fs;
use std::path::Path;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Nearest,
    LinearPixelCount,
}

/// Multiplicative lognormal jitter. Real inference latency is
/// right-skewed; the draw multiplies the base latency, with median 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterConfig {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyEntry {
    pub width: u32,
    pub height: u32,
    pub latency_us: i64,
}

impl LatencyEntry {
    pub fn pixels(&self) -> u64 {
        self.width as u64 * self.height as u64
    }
}

/// Table of measured end-to-end latencies keyed by input resolution.
/// Entries are kept sorted by pixel count.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyModel {
    entries: Vec<LatencyEntry>,
    pub interpolation: Interpolation,
    pub jitter: Option<JitterConfig>,
}

impl LatencyModel {
    pub fn new(
        mut entries: Vec<LatencyEntry>,
        interpolation: Interpolation,
        jitter: Option<JitterConfig>,
    ) -> Result<Self, SimError> {
        if entries.is_empty() {
            return Err(SimError::EmptyLatencyTable);
        }
        for e in &entries {
            if e.width == 0 || e.height == 0 {
                return Err(SimError::InvalidLatencyEntry {
                    reason: format!("resolution {}x{} must be positive", e.width, e.height),
                });
            }
            if e.latency_us < 0 {
                return Err(SimError::InvalidLatencyEntry {
                    reason: format!("latency {} us must be non-negative", e.latency_us),
                });
            }
        }
        entries.sort_by_key(LatencyEntry::pixels);
        for w in entries.windows(2) {
            if w[0].pixels() == w[1].pixels() {
                return Err(SimError::DuplicatePixelCount {
                    pixels: w[0].pixels(),
                });
            }
        }
        if let Some(j) = &jitter {
            if !j.sigma.is_finite() || j.sigma <= 0.0 {
                return Err(SimError::InvalidLatencyEntry {
                    reason: format!("jitter sigma {} must be positive", j.sigma),
                });
            }
        }
        Ok(Self {
            entries,
            interpolation,
            jitter,
        })
    }

    pub fn entries(&self) -> &[LatencyEntry] {
        &self.entries
    }

    /// Base latency for an input resolution: the exact table value when
    /// the pixel count matches an entry, otherwise per the interpolation
    /// mode. Jitter is applied by the simulator, not here, so this is a
    /// pure function.
    pub fn latency_for(&self, width: u32, height: u32) -> Result<i64, SimError> {
        if width == 0 || height == 0 {
            return Err(SimError::InvalidLatencyEntry {
                reason: format!("resolution {width}x{height} must be positive"),
            });
        }
        let px = width as u64 * height as u64;
        if let Some(e) = self.entries.iter().find(|e| e.pixels() == px) {
            return Ok(e.latency_us);
        }
        match self.interpolation {
            Interpolation::Nearest => {
                // Ties toward the smaller pixel count, for determinism.
                let e = self
                    .entries
                    .iter()
                    .min_by_key(|e| (e.pixels().abs_diff(px), e.pixels()))
                    .expect("entries non-empty");
                Ok(e.latency_us)
            }
            Interpolation::LinearPixelCount => {
                let first = self.entries.first().expect("entries non-empty");
                let last = self.entries.last().expect("entries non-empty");
                if px < first.pixels() || px > last.pixels() {
                    return Err(SimError::Extrapolation {
                        pixels: px,
                        min: first.pixels(),
                        max: last.pixels(),
                    });
                }
                let hi_idx = self
                    .entries
                    .iter()
                    .position(|e| e.pixels() > px)
                    .expect("px is inside the span and not an exact match");
                let lo = &self.entries[hi_idx - 1];
                let hi = &self.entries[hi_idx];
                let t = (px - lo.pixels()) as f64 / (hi.pixels() - lo.pixels()) as f64;
                let latency = lo.latency_us as f64 + (hi.latency_us - lo.latency_us) as f64 * t;
                Ok(latency.round() as i64)
            }
        }
    }

    /// Parse the plain-text table: one `width height latency_us` entry
    /// per line, `#` comments and blank lines allowed.
    pub fn from_table_str(
        text: &str,
        interpolation: Interpolation,
        jitter: Option<JitterConfig>,
    ) -> Result<Self, SimError> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(SimError::TableParse {
                    line: lineno + 1,
                    reason: format!("expected `width height latency_us`, got {} fields", fields.len()),
                });
            }
            let parse = |s: &str, what: &str| -> Result<i64, SimError> {
                s.parse().map_err(|_| SimError::TableParse {
                    line: lineno + 1,
                    reason: format!("bad {what}: {s}"),
                })
            };
            let width = parse(fields[0], "width")?;
            let height = parse(fields[1], "height")?;
            let latency_us = parse(fields[2], "latency")?;
            if width <= 0 || width > u32::MAX as i64 || height <= 0 || height > u32::MAX as i64 {
                return Err(SimError::TableParse {
                    line: lineno + 1,
                    reason: format!("resolution {width}x{height} out of range"),
                });
            }
            entries.push(LatencyEntry {
                width: width as u32,
                height: height as u32,
                latency_us,
            });
        }
        Self::new(entries, interpolation, jitter)
    }

    pub fn load(
        path: &Path,
        interpolation: Interpolation,
        jitter: Option<JitterConfig>,
    ) -> Result<Self, SimError> {
        let text = fs::read_to_string(path).map_err(|e| SimError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_table_str(&text, interpolation, jitter)
    }
}
