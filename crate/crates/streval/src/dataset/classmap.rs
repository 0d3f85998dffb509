//! Taxonomy unification: tab-separated rules mapping every class of a
//! source dataset onto a target category table, with `DROP` as the
//! reserved discard target.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{CategoryTable, DatasetBundle, DatasetError};
use crate::types::{CategoryId, GroundTruthObject};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapTarget {
    Class(String),
    Drop,
}

impl std::fmt::Display for MapTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MapTarget::Class(c) => write!(f, "{c}"),
            MapTarget::Drop => write!(f, "DROP"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMapRule {
    pub source_dataset: String,
    pub source_class: String,
    pub target: MapTarget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    pub rules: Vec<ClassMapRule>,
}

impl ClassMap {
    /// Parse the rule file: one `source_dataset<TAB>source_class<TAB>target`
    /// per line; `#` comments and blank lines allowed.
    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let mut rules: Vec<ClassMapRule> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(DatasetError::ClassMapParse {
                    line: lineno + 1,
                    reason: "expected `source_dataset<TAB>source_class<TAB>target_class`".into(),
                });
            }
            let rule = ClassMapRule {
                source_dataset: fields[0].to_string(),
                source_class: fields[1].to_string(),
                target: if fields[2] == "DROP" {
                    MapTarget::Drop
                } else {
                    MapTarget::Class(fields[2].to_string())
                },
            };
            if rules.iter().any(|r| {
                r.source_dataset == rule.source_dataset && r.source_class == rule.source_class
            }) {
                return Err(DatasetError::ClassMapParse {
                    line: lineno + 1,
                    reason: format!(
                        "duplicate rule for {}/{}",
                        rule.source_dataset, rule.source_class
                    ),
                });
            }
            rules.push(rule);
        }
        Ok(Self { rules })
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path).map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn rules_for(&self, source_dataset: &str) -> Vec<&ClassMapRule> {
        self.rules
            .iter()
            .filter(|r| r.source_dataset == source_dataset)
            .collect()
    }
}

/// Per-rule relabel/drop counts, in rule order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCount {
    pub rule: ClassMapRule,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemapReport {
    pub counts: Vec<RuleCount>,
}

/// Re-label every ground-truth object of `bundle` per the rules for
/// `source_dataset`, dropping objects mapped to `DROP`. The map must be
/// total over the bundle's categories; frames and geometry are never
/// altered, only labels and membership.
pub fn remap(
    bundle: &DatasetBundle,
    map: &ClassMap,
    source_dataset: &str,
    target: &CategoryTable,
) -> Result<(DatasetBundle, RemapReport), DatasetError> {
    let rules = map.rules_for(source_dataset);

    let mut by_source: HashMap<&str, (usize, &ClassMapRule)> = HashMap::new();
    for (i, r) in rules.iter().enumerate() {
        by_source.insert(r.source_class.as_str(), (i, r));
    }

    let unmapped: Vec<String> = bundle
        .category_table
        .names()
        .iter()
        .filter(|n| !by_source.contains_key(n.as_str()))
        .cloned()
        .collect();
    if !unmapped.is_empty() {
        return Err(DatasetError::Coverage { unmapped });
    }

    // Resolve targets up front so a bad rule fails before any work.
    let mut resolved: HashMap<&str, Option<CategoryId>> = HashMap::new();
    for r in &rules {
        let target_id = match &r.target {
            MapTarget::Drop => None,
            MapTarget::Class(name) => Some(target.id_of(name).ok_or_else(|| {
                DatasetError::UnknownTargetClass {
                    source_class: r.source_class.clone(),
                    target: name.clone(),
                }
            })?),
        };
        resolved.insert(r.source_class.as_str(), target_id);
    }

    let mut counts = vec![0usize; rules.len()];
    let mut sequences = bundle.sequences.clone();
    for frames in sequences.values_mut() {
        for frame in frames.iter_mut() {
            let mut kept: Vec<GroundTruthObject> = Vec::with_capacity(frame.ground_truth.len());
            for g in &frame.ground_truth {
                let name = bundle
                    .category_table
                    .name_of(g.category)
                    .expect("bundle invariant: categories resolve in the table");
                let (rule_idx, _) = by_source[name];
                counts[rule_idx] += 1;
                if let Some(new_id) = resolved[name] {
                    let mut g = g.clone();
                    g.category = new_id;
                    kept.push(g);
                }
            }
            frame.ground_truth = kept;
        }
    }

    let report = RemapReport {
        counts: rules
            .iter()
            .zip(counts)
            .map(|(r, count)| RuleCount {
                rule: (*r).clone(),
                count,
            })
            .collect(),
    };
    Ok((
        DatasetBundle {
            category_table: target.clone(),
            sequences,
            fps: bundle.fps,
            file_names: bundle.file_names.clone(),
        },
        report,
    ))
}
