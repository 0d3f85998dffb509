//! Unify a source dataset's taxonomy onto a target category table with a
//! rule file, dropping classes that have no counterpart.
//!
//! ```bash
//! cargo run -p streval --example class_remap
//! ```

use std::collections::BTreeMap;

use streval::dataset::{remap, CategoryTable, ClassMap, DatasetBundle};
use streval::types::{BoundingBox, CategoryId, FrameRecord, GroundTruthObject};

fn main() {
    // A source dataset with a 6-class taxonomy.
    let source_table = CategoryTable::new(
        ["auto", "pedestrian", "cyclist", "rider", "signal", "pole"]
            .into_iter()
            .map(String::from)
            .collect(),
    )
    .unwrap();

    let objects = [
        (0, 100.0), // auto
        (0, 300.0),
        (1, 500.0), // pedestrian
        (2, 700.0), // cyclist
        (3, 900.0), // rider
        (4, 1100.0), // signal
        (5, 1300.0), // pole
    ];
    let gts = objects
        .iter()
        .map(|&(cat, x)| {
            GroundTruthObject::new(
                BoundingBox::new(x, 200.0, x + 80.0, 350.0).unwrap(),
                CategoryId(cat),
                false,
            )
        })
        .collect();
    let mut sequences = BTreeMap::new();
    sequences.insert(0, vec![FrameRecord::new(0, 0, 0, 1920, 1200, gts).unwrap()]);
    let bundle = DatasetBundle {
        category_table: source_table,
        sequences,
        fps: 30.0,
        file_names: BTreeMap::new(),
    };

    // Rules are plain TSV: source_dataset, source_class, target (or DROP).
    let rules = "\
demo\tauto\tcar
demo\tpedestrian\tperson
demo\tcyclist\tbicycle
demo\trider\tperson
demo\tsignal\ttraffic_light
demo\tpole\tDROP
";
    let map = ClassMap::parse(rules).unwrap();
    let target = CategoryTable::new(
        ["person", "bicycle", "car", "traffic_light"]
            .into_iter()
            .map(String::from)
            .collect(),
    )
    .unwrap();

    let (unified, report) = remap(&bundle, &map, "demo", &target).unwrap();

    println!("remapped {} objects onto {} target classes:", bundle.object_count(), target.len());
    for rc in &report.counts {
        println!(
            "  {:<12} -> {:<14} {:>3} objects",
            rc.rule.source_class,
            rc.rule.target.to_string(),
            rc.count
        );
    }
    println!(
        "\nkept {} of {} objects; frames untouched: {}",
        unified.object_count(),
        bundle.object_count(),
        unified.frame_count() == bundle.frame_count()
    );
    for g in &unified.flatten()[0].ground_truth {
        println!(
            "  {} at x={}",
            unified.category_table.name_of(g.category).unwrap(),
            g.bbox.x_min()
        );
    }
}
