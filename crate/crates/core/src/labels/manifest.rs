use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::LabelError;

/// One scene: ids plus the three files that describe it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub scene_id: String,
    #[serde(rename = "disaster")]
    pub disaster_name: String,
    pub pre_image: PathBuf,
    pub post_image: PathBuf,
    pub label: PathBuf,
}

/// CSV manifest with header `scene_id,disaster,pre_image,post_image,label`.
///
/// Relative paths in the file are resolved against the manifest's directory on read,
/// and written relative to it when possible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self, LabelError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.scene_id.as_str()) {
                return Err(LabelError::DuplicateScene(e.scene_id.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, scene_id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.scene_id == scene_id)
    }

    /// Keeps only the listed scenes, in manifest order.
    pub fn subset(&self, scene_ids: &[String]) -> DatasetManifest {
        let keep: HashSet<&str> = scene_ids.iter().map(String::as_str).collect();
        DatasetManifest {
            entries: self.entries.iter().filter(|e| keep.contains(e.scene_id.as_str())).cloned().collect(),
        }
    }

    pub fn from_reader<R: std::io::Read>(reader: R, base: &Path) -> Result<Self, LabelError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut entries = Vec::new();
        for row in rdr.deserialize() {
            let mut e: ManifestEntry = row?;
            for p in [&mut e.pre_image, &mut e.post_image, &mut e.label] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            entries.push(e);
        }
        Self::new(entries)
    }

    pub fn read(path: &Path) -> Result<Self, LabelError> {
        let file = std::fs::File::open(path).map_err(|e| LabelError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_reader(file, base)
    }

    pub fn to_writer<W: std::io::Write>(&self, writer: W, base: &Path) -> Result<(), LabelError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for e in &self.entries {
            let mut e = e.clone();
            for p in [&mut e.pre_image, &mut e.post_image, &mut e.label] {
                if let Ok(rel) = p.strip_prefix(base) {
                    *p = rel.to_path_buf();
                }
            }
            wtr.serialize(e)?;
        }
        wtr.flush().map_err(|e| LabelError::io(base, e))?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), LabelError> {
        let file = std::fs::File::create(path).map_err(|e| LabelError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        self.to_writer(file, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, dis: &str, base: &Path) -> ManifestEntry {
        ManifestEntry {
            scene_id: id.into(),
            disaster_name: dis.into(),
            pre_image: base.join(format!("images/{id}_pre.png")),
            post_image: base.join(format!("images/{id}_post.png")),
            label: base.join(format!("labels/{id}.json")),
        }
    }

    #[test]
    fn csv_round_trip_with_relative_paths() {
        let base = Path::new("/data/set");
        let m = DatasetManifest::new(vec![entry("a", "flood", base), entry("b", "fire", base)]).unwrap();
        let mut buf = Vec::new();
        m.to_writer(&mut buf, base).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scene_id,disaster,pre_image,post_image,label\n"));
        assert!(text.contains("a,flood,images/a_pre.png,images/a_post.png,labels/a.json"));
        let back = DatasetManifest::from_reader(buf.as_slice(), base).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn duplicate_scene_rejected() {
        let base = Path::new("");
        let r = DatasetManifest::new(vec![entry("a", "x", base), entry("a", "y", base)]);
        assert!(matches!(r, Err(LabelError::DuplicateScene(_))));
    }

    #[test]
    fn subset_keeps_order() {
        let base = Path::new("");
        let m = DatasetManifest::new(vec![entry("a", "x", base), entry("b", "x", base), entry("c", "x", base)])
            .unwrap();
        let s = m.subset(&["c".into(), "a".into()]);
        let ids: Vec<_> = s.entries.iter().map(|e| e.scene_id.as_str()).collect();
        assert_eq!(ids, ["a", "c"]);
    }
}
