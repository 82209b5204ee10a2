//! Seeded per-disaster train/validation split.
//!
//! For each disaster with `N` scenes, `floor(val_fraction * N)` scenes go to
//! validation and the rest to training. Membership comes from a Fisher-Yates
//! shuffle of that disaster's lexicographically sorted scene ids, driven by
//! [`XorShift64Star`] seeded with `seed ^ fnv1a64(disaster_name)`. The result
//! depends only on the set of (scene_id, disaster) pairs and the seed.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::DatasetManifest;
use crate::rng::XorShift64Star;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("manifest is empty")]
    EmptyManifest,
    #[error("validation fraction {0} outside (0, 1)")]
    BadFraction(f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisasterCounts {
    pub total: usize,
    pub train: usize,
    pub val: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub val_fraction: f64,
    pub per_disaster: BTreeMap<String, DisasterCounts>,
    /// Sorted.
    #[serde(skip)]
    pub train: Vec<String>,
    /// Sorted.
    #[serde(skip)]
    pub val: Vec<String>,
}

/// `floor(fraction * n)`, tolerant of representation error just below an integer.
pub fn val_count(n: usize, val_fraction: f64) -> usize {
    (val_fraction * n as f64 + 1e-9).floor() as usize
}

pub fn stratified_split(manifest: &DatasetManifest, val_fraction: f64, seed: u64) -> Result<SplitManifest, SplitError> {
    if manifest.is_empty() {
        return Err(SplitError::EmptyManifest);
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(SplitError::BadFraction(val_fraction));
    }
    let mut by_disaster: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &manifest.entries {
        by_disaster.entry(&e.disaster_name).or_default().push(&e.scene_id);
    }
    let mut out = SplitManifest { seed, val_fraction, per_disaster: BTreeMap::new(), train: vec![], val: vec![] };
    for (disaster, mut ids) in by_disaster {
        ids.sort_unstable();
        let n_val = val_count(ids.len(), val_fraction);
        XorShift64Star::substream(seed, disaster).shuffle(&mut ids);
        out.val.extend(ids[..n_val].iter().map(|s| s.to_string()));
        out.train.extend(ids[n_val..].iter().map(|s| s.to_string()));
        out.per_disaster
            .insert(disaster.to_string(), DisasterCounts { total: ids.len(), train: ids.len() - n_val, val: n_val });
    }
    out.train.sort_unstable();
    out.val.sort_unstable();
    Ok(out)
}

impl SplitManifest {
    /// Writes `train.txt`, `val.txt` (one id per line, sorted) and `split.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), SplitError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| SplitError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let lines = |ids: &[String]| ids.iter().map(|s| format!("{s}\n")).collect::<String>();
        let p = dir.join("train.txt");
        std::fs::write(&p, lines(&self.train)).map_err(io(&p))?;
        let p = dir.join("val.txt");
        std::fs::write(&p, lines(&self.val)).map_err(io(&p))?;
        let p = dir.join("split.json");
        let json = serde_json::to_string_pretty(self).expect("split metadata serializes");
        std::fs::write(&p, json + "\n").map_err(io(&p))?;
        Ok(())
    }
}

/// Reads a one-id-per-line list such as `train.txt`.
pub fn read_id_list(path: &Path) -> std::io::Result<Vec<String>> {
    Ok(std::fs::read_to_string(path)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}
