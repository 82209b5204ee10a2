use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{DamageLabel, DatasetManifest, LabelError, SceneLabel};

/// Damage and density distribution over a set of scenes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DistributionReport {
    pub images: usize,
    pub buildings: usize,
    pub images_per_disaster: BTreeMap<String, usize>,
    /// Counts indexed by damage ordinal 0..=3.
    pub class_counts: [usize; 4],
    pub class_counts_per_disaster: BTreeMap<String, [usize; 4]>,
    pub unclassified: usize,
    pub unlabeled: usize,
    /// buildings-in-image -> number of images
    pub buildings_per_image: BTreeMap<usize, usize>,
    /// (scene_id, message) for every entry whose label failed to load.
    pub errors: Vec<(String, String)>,
}

impl DistributionReport {
    /// Class fractions over assessed buildings; zeros when there are none.
    pub fn class_fractions(&self) -> [f64; 4] {
        let total: usize = self.class_counts.iter().sum();
        if total == 0 {
            return [0.0; 4];
        }
        self.class_counts.map(|c| c as f64 / total as f64)
    }
}

/// Loads every label listed in the manifest, one result per entry.
pub fn load_labels(manifest: &DatasetManifest) -> Vec<Result<SceneLabel, LabelError>> {
    manifest.entries.par_iter().map(|e| SceneLabel::read(&e.label)).collect()
}

/// Tallies images, damage classes, and building density; failed entries are listed, not fatal.
pub fn dataset_stats(
    manifest: &DatasetManifest,
    labels: &[Result<SceneLabel, LabelError>],
) -> DistributionReport {
    let mut r = DistributionReport::default();
    for (entry, label) in manifest.entries.iter().zip(labels) {
        let label = match label {
            Ok(l) => l,
            Err(e) => {
                r.errors.push((entry.scene_id.clone(), e.to_string()));
                continue;
            }
        };
        let disaster = &entry.disaster_name;
        r.images += 1;
        *r.images_per_disaster.entry(disaster.clone()).or_default() += 1;
        *r.buildings_per_image.entry(label.buildings.len()).or_default() += 1;
        let per = r.class_counts_per_disaster.entry(disaster.clone()).or_default();
        for b in &label.buildings {
            r.buildings += 1;
            match b.label {
                DamageLabel::Assessed(c) => {
                    r.class_counts[usize::from(c.ordinal())] += 1;
                    per[usize::from(c.ordinal())] += 1;
                }
                DamageLabel::Unclassified => r.unclassified += 1,
                DamageLabel::Unlabeled => r.unlabeled += 1,
            }
        }
    }
    r
}
