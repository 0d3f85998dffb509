//! COCO-format annotation ingest (the schema subset used by road-scene
//! video datasets) and the matching writer.
//!
//! Boxes arrive as `[x, y, w, h]` and are normalized to corner form.
//! Frames group by `sid` when present; capture times come from
//! `timestamp` fields (microseconds) when present, otherwise they are
//! synthesized on an exact 1/fps grid.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CategoryTable, DatasetBundle, DatasetError};
use crate::types::{BoundingBox, CategoryId, FrameRecord, GroundTruthObject};

#[derive(Debug, Deserialize, Serialize)]
struct RawDataset {
    images: Vec<RawImage>,
    annotations: Vec<RawAnnotation>,
    categories: Vec<RawCategory>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawImage {
    id: i64,
    width: i64,
    height: i64,
    file_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sid: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fid: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<i64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawAnnotation {
    id: i64,
    image_id: i64,
    category_id: i64,
    bbox: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    iscrowd: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ignore: Option<i64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawCategory {
    id: i64,
    name: String,
}

pub fn load_coco_annotations(path: &Path, fps: f64) -> Result<DatasetBundle, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_coco_annotations(&text, fps)
}

pub(crate) fn parse_coco_annotations(text: &str, fps: f64) -> Result<DatasetBundle, DatasetError> {
    if !fps.is_finite() || fps <= 0.0 {
        return Err(DatasetError::InvalidFps(fps));
    }
    let raw: RawDataset = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            DatasetError::Parse(e.to_string())
        } else {
            DatasetError::Schema(e.to_string())
        }
    })?;

    // Categories: table index order follows ascending raw id.
    let mut cats = raw.categories;
    cats.sort_by_key(|c| c.id);
    let mut cat_ids = HashSet::new();
    for c in &cats {
        if !cat_ids.insert(c.id) {
            return Err(DatasetError::Schema(format!(
                "duplicate category id {}",
                c.id
            )));
        }
    }
    let table = CategoryTable::new(cats.iter().map(|c| c.name.clone()).collect())?;
    let cat_index: HashMap<i64, CategoryId> = cats
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id, CategoryId(i)))
        .collect();

    let mut image_index: HashMap<i64, usize> = HashMap::with_capacity(raw.images.len());
    for (i, img) in raw.images.iter().enumerate() {
        if image_index.insert(img.id, i).is_some() {
            return Err(DatasetError::Schema(format!("duplicate image id {}", img.id)));
        }
        if img.width <= 0 || img.height <= 0 || img.width > u32::MAX as i64 || img.height > u32::MAX as i64 {
            return Err(DatasetError::Validation(format!(
                "image {} has invalid dimensions {}x{}",
                img.id, img.width, img.height
            )));
        }
    }

    let mut gt_by_image: HashMap<i64, Vec<GroundTruthObject>> = HashMap::new();
    for ann in &raw.annotations {
        if !image_index.contains_key(&ann.image_id) {
            return Err(DatasetError::Schema(format!(
                "annotation {} references missing image_id {}",
                ann.id, ann.image_id
            )));
        }
        let category = *cat_index.get(&ann.category_id).ok_or_else(|| {
            DatasetError::Schema(format!(
                "annotation {} references unknown category_id {}",
                ann.id, ann.category_id
            ))
        })?;
        let [x, y, w, h] = ann.bbox;
        let bbox = BoundingBox::new(x, y, x + w, y + h).map_err(|e| {
            DatasetError::Validation(format!("annotation {}: {e}", ann.id))
        })?;
        let ignore = ann.iscrowd.unwrap_or(0) != 0 || ann.ignore.unwrap_or(0) != 0;
        gt_by_image
            .entry(ann.image_id)
            .or_default()
            .push(GroundTruthObject::new(bbox, category, ignore));
    }

    // Grouping keys must be used consistently across the file.
    let with_sid = raw.images.iter().filter(|i| i.sid.is_some()).count();
    if with_sid != 0 && with_sid != raw.images.len() {
        return Err(DatasetError::Schema(
            "sid must be present on all images or none".into(),
        ));
    }
    let with_fid = raw.images.iter().filter(|i| i.fid.is_some()).count();
    if with_fid != 0 && with_fid != raw.images.len() {
        return Err(DatasetError::Schema(
            "fid must be present on all images or none".into(),
        ));
    }
    let with_ts = raw.images.iter().filter(|i| i.timestamp.is_some()).count();
    if with_ts != 0 && with_ts != raw.images.len() {
        return Err(DatasetError::Schema(
            "timestamp must be present on all images or none".into(),
        ));
    }

    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, img) in raw.images.iter().enumerate() {
        groups.entry(img.sid.unwrap_or(0)).or_default().push(i);
    }

    let mut sequences: BTreeMap<i64, Vec<FrameRecord>> = BTreeMap::new();
    let mut file_names: BTreeMap<i64, String> = BTreeMap::new();
    for (seq_id, mut members) in groups {
        if with_fid > 0 {
            members.sort_by_key(|&i| raw.images[i].fid.expect("fid presence checked"));
            for w in members.windows(2) {
                if raw.images[w[0]].fid == raw.images[w[1]].fid {
                    return Err(DatasetError::Schema(format!(
                        "duplicate fid {:?} in sequence {seq_id}",
                        raw.images[w[0]].fid
                    )));
                }
            }
        } else {
            members.sort_by_key(|&i| raw.images[i].id);
        }

        let mut frames = Vec::with_capacity(members.len());
        let mut prev_t: Option<i64> = None;
        for (pos, &i) in members.iter().enumerate() {
            let img = &raw.images[i];
            let t = match img.timestamp {
                Some(t) => t,
                // Rounding per index keeps the synthesized grid within
                // half a microsecond of the exact rational spacing.
                None => (pos as f64 * 1_000_000.0 / fps).round() as i64,
            };
            if let Some(p) = prev_t {
                if t <= p {
                    return Err(DatasetError::Validation(format!(
                        "capture times not strictly increasing in sequence {seq_id} at image {}",
                        img.id
                    )));
                }
            }
            prev_t = Some(t);
            let gts = gt_by_image.remove(&img.id).unwrap_or_default();
            let frame = FrameRecord::new(
                img.id,
                seq_id,
                t,
                img.width as u32,
                img.height as u32,
                gts,
            )?;
            frames.push(frame);
            file_names.insert(img.id, img.file_name.clone());
        }
        sequences.insert(seq_id, frames);
    }

    Ok(DatasetBundle {
        category_table: table,
        sequences,
        fps,
        file_names,
    })
}

/// Write a bundle back out in the annotation schema subset. Sequenced
/// bundles carry `sid`, `fid` and `timestamp`; the ignore flag is stored
/// as `iscrowd`.
pub fn write_coco_annotations(path: &Path, bundle: &DatasetBundle) -> Result<(), DatasetError> {
    let mut images = Vec::new();
    let mut annotations = Vec::new();
    let mut next_ann_id = 1i64;
    for (seq_id, frames) in &bundle.sequences {
        for (pos, f) in frames.iter().enumerate() {
            images.push(RawImage {
                id: f.frame_id,
                width: f.width as i64,
                height: f.height as i64,
                file_name: bundle
                    .file_names
                    .get(&f.frame_id)
                    .cloned()
                    .unwrap_or_else(|| format!("{}.jpg", f.frame_id)),
                sid: Some(*seq_id),
                fid: Some(pos as i64),
                timestamp: Some(f.capture_time_us),
            });
            for g in &f.ground_truth {
                annotations.push(RawAnnotation {
                    id: next_ann_id,
                    image_id: f.frame_id,
                    category_id: g.category.0 as i64,
                    bbox: [
                        g.bbox.x_min(),
                        g.bbox.y_min(),
                        g.bbox.width(),
                        g.bbox.height(),
                    ],
                    iscrowd: Some(g.ignore as i64),
                    ignore: None,
                });
                next_ann_id += 1;
            }
        }
    }
    let categories = bundle
        .category_table
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| RawCategory {
            id: i as i64,
            name: name.clone(),
        })
        .collect();
    let raw = RawDataset {
        images,
        annotations,
        categories,
    };
    let json = serde_json::to_string_pretty(&raw).expect("plain data serializes");
    fs::write(path, json).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
