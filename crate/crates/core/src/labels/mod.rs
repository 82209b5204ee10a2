//! Scene annotations in the xBD JSON layout, dataset manifests, and statistics.

mod manifest;
mod polygon;
mod stats;
mod wkt;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use manifest::{DatasetManifest, ManifestEntry};
pub use polygon::{BoundingBox, Point, Polygon};
pub use stats::{dataset_stats, load_labels, DistributionReport};
pub use self::wkt::parse_wkt_polygon;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("malformed WKT: {0}")]
    Wkt(String),
    #[error("polygon ring has {0} distinct vertices, need at least 3")]
    TooFewVertices(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("malformed label JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown damage subtype {0:?}")]
    UnknownSubtype(String),
    #[error("missing metadata field {0:?}")]
    MissingMetadata(&'static str),
    #[error("image dimensions must be positive, got {0}x{1}")]
    BadDimensions(u32, u32),
    #[error("duplicate building uid {0:?}")]
    DuplicateUid(String),
    #[error("duplicate scene id {0:?} in manifest")]
    DuplicateScene(String),
    #[error("manifest: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl LabelError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

/// Joint damage scale, no damage (0) through destroyed (3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DamageClass {
    NoDamage = 0,
    MinorDamage = 1,
    MajorDamage = 2,
    Destroyed = 3,
}

impl DamageClass {
    pub const ALL: [DamageClass; 4] =
        [Self::NoDamage, Self::MinorDamage, Self::MajorDamage, Self::Destroyed];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(ordinal: u8) -> Option<Self> {
        Self::ALL.get(usize::from(ordinal)).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::NoDamage => "no-damage",
            Self::MinorDamage => "minor-damage",
            Self::MajorDamage => "major-damage",
            Self::Destroyed => "destroyed",
        }
    }

    /// Value painted into dense masks, where 0 is background.
    pub fn mask_value(self) -> u8 {
        self.ordinal() + 1
    }

    /// Inverse of [`DamageClass::mask_value`]; background and out-of-range values map to `None`.
    pub fn from_mask_value(value: u8) -> Option<Self> {
        value.checked_sub(1).and_then(Self::from_ordinal)
    }
}

impl fmt::Display for DamageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DamageClass {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabelError::UnknownSubtype(s.to_string()))
    }
}

pub const UNCLASSIFIED_SUBTYPE: &str = "un-classified";

/// What the annotation says about a building's damage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DamageLabel {
    /// No subtype field (pre-disaster labels).
    Unlabeled,
    /// Subtype "un-classified": kept, but excluded from every metric.
    Unclassified,
    Assessed(DamageClass),
}

impl DamageLabel {
    pub fn damage(self) -> Option<DamageClass> {
        match self {
            Self::Assessed(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildingAnnotation {
    pub uid: String,
    pub footprint: Polygon,
    pub label: DamageLabel,
}

impl BuildingAnnotation {
    pub fn damage(&self) -> Option<DamageClass> {
        self.label.damage()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneLabel {
    pub scene_id: String,
    pub disaster_name: String,
    pub width: u32,
    pub height: u32,
    pub buildings: Vec<BuildingAnnotation>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelWarning {
    /// A footprint vertex fell outside the image and was clamped.
    Clamped { uid: String },
}

// Wire layout. Unknown fields (xBD carries many more) are ignored.
#[derive(Serialize, Deserialize)]
struct RawLabel {
    metadata: RawMetadata,
    features: RawFeatures,
}

#[derive(Serialize, Deserialize)]
struct RawMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    disaster: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing)]
    img_name: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawFeatures {
    #[serde(default)]
    xy: Vec<RawFeature>,
}

#[derive(Serialize, Deserialize)]
struct RawFeature {
    wkt: String,
    properties: RawProperties,
}

#[derive(Serialize, Deserialize)]
struct RawProperties {
    #[serde(default = "building_type")]
    feature_type: String,
    uid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subtype: Option<String>,
}

fn building_type() -> String {
    "building".to_string()
}

impl SceneLabel {
    pub fn new(
        scene_id: impl Into<String>,
        disaster_name: impl Into<String>,
        width: u32,
        height: u32,
    ) -> Result<Self, LabelError> {
        if width == 0 || height == 0 {
            return Err(LabelError::BadDimensions(width, height));
        }
        Ok(Self {
            scene_id: scene_id.into(),
            disaster_name: disaster_name.into(),
            width,
            height,
            buildings: Vec::new(),
        })
    }

    /// Buildings carrying an assessed damage class, with that class.
    pub fn assessed(&self) -> impl Iterator<Item = (&BuildingAnnotation, DamageClass)> {
        self.buildings.iter().filter_map(|b| b.damage().map(|d| (b, d)))
    }

    pub fn to_json(&self) -> String {
        let raw = RawLabel {
            metadata: RawMetadata {
                disaster: Some(self.disaster_name.clone()),
                width: Some(self.width),
                height: Some(self.height),
                id: Some(self.scene_id.clone()),
                img_name: None,
            },
            features: RawFeatures {
                xy: self
                    .buildings
                    .iter()
                    .map(|b| RawFeature {
                        wkt: b.footprint.to_wkt(),
                        properties: RawProperties {
                            feature_type: building_type(),
                            uid: b.uid.clone(),
                            subtype: match b.label {
                                DamageLabel::Unlabeled => None,
                                DamageLabel::Unclassified => Some(UNCLASSIFIED_SUBTYPE.to_string()),
                                DamageLabel::Assessed(c) => Some(c.name().to_string()),
                            },
                        },
                    })
                    .collect(),
            },
        };
        serde_json::to_string_pretty(&raw).expect("label serialization is infallible")
    }

    pub fn read(path: &Path) -> Result<Self, LabelError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabelError::io(path, e))?;
        parse_scene_label(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), LabelError> {
        std::fs::write(path, self.to_json()).map_err(|e| LabelError::io(path, e))
    }
}

/// Parses a label file, logging any clamping warnings.
pub fn parse_scene_label(text: &str) -> Result<SceneLabel, LabelError> {
    let (label, warnings) = parse_scene_label_with_warnings(text)?;
    for w in &warnings {
        match w {
            LabelWarning::Clamped { uid } => {
                log::warn!("{}: building {uid} clamped to image bounds", label.scene_id)
            }
        }
    }
    Ok(label)
}

pub fn parse_scene_label_with_warnings(
    text: &str,
) -> Result<(SceneLabel, Vec<LabelWarning>), LabelError> {
    let raw: RawLabel = serde_json::from_str(text)?;
    let md = raw.metadata;
    let disaster = md.disaster.ok_or(LabelError::MissingMetadata("disaster"))?;
    let width = md.width.ok_or(LabelError::MissingMetadata("width"))?;
    let height = md.height.ok_or(LabelError::MissingMetadata("height"))?;
    let id = md.id.or(md.img_name).ok_or(LabelError::MissingMetadata("id"))?;
    let mut label = SceneLabel::new(id, disaster, width, height)?;

    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for feat in raw.features.xy {
        if feat.properties.feature_type != "building" {
            continue;
        }
        let uid = feat.properties.uid;
        if !seen.insert(uid.clone()) {
            return Err(LabelError::DuplicateUid(uid));
        }
        let damage = match feat.properties.subtype.as_deref() {
            None => DamageLabel::Unlabeled,
            Some(UNCLASSIFIED_SUBTYPE) => DamageLabel::Unclassified,
            Some(s) => DamageLabel::Assessed(s.parse()?),
        };
        let (footprint, moved) = parse_wkt_polygon(&feat.wkt)?.clamped(width, height);
        if moved {
            warnings.push(LabelWarning::Clamped { uid: uid.clone() });
        }
        label.buildings.push(BuildingAnnotation { uid, footprint, label: damage });
    }
    Ok((label, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ONE_DESTROYED: &str = r#"{"metadata":{"disaster":"socal-fire","width":1024,"height":1024,"id":"s1"},
        "features":{"xy":[{"wkt":"POLYGON ((0 0, 10 0, 10 10, 0 10, 0 0))",
        "properties":{"feature_type":"building","uid":"b1","subtype":"destroyed"}}]}}"#;

    #[test]
    fn damage_names_bijective() {
        for c in DamageClass::ALL {
            assert_eq!(c.name().parse::<DamageClass>().unwrap(), c);
            assert_eq!(DamageClass::from_ordinal(c.ordinal()), Some(c));
            assert_eq!(DamageClass::from_mask_value(c.mask_value()), Some(c));
        }
        assert_eq!(DamageClass::from_ordinal(4), None);
        assert_eq!(DamageClass::from_mask_value(0), None);
        assert!("un-classified".parse::<DamageClass>().is_err());
    }

    #[test]
    fn parses_minimal_label() {
        let l = parse_scene_label(ONE_DESTROYED).unwrap();
        assert_eq!(l.scene_id, "s1");
        assert_eq!(l.disaster_name, "socal-fire");
        assert_eq!(l.buildings.len(), 1);
        assert_eq!(l.buildings[0].damage(), Some(DamageClass::Destroyed));
        assert_eq!(l.buildings[0].damage().unwrap().ordinal(), 3);
    }

    #[test]
    fn empty_scene_is_valid() {
        let l = parse_scene_label(
            r#"{"metadata":{"disaster":"x","width":16,"height":16,"id":"e"},"features":{"xy":[]}}"#,
        )
        .unwrap();
        assert!(l.buildings.is_empty());
    }

    #[test]
    fn missing_subtype_is_unlabeled() {
        let text = ONE_DESTROYED.replace(r#","subtype":"destroyed""#, "");
        let l = parse_scene_label(&text).unwrap();
        assert_eq!(l.buildings[0].label, DamageLabel::Unlabeled);
        assert_eq!(l.buildings[0].damage(), None);
    }

    #[test]
    fn unclassified_carried_and_round_trips() {
        let text = ONE_DESTROYED.replace("destroyed", "un-classified");
        let l = parse_scene_label(&text).unwrap();
        assert_eq!(l.buildings[0].label, DamageLabel::Unclassified);
        assert_eq!(l.assessed().count(), 0);
        assert_eq!(parse_scene_label(&l.to_json()).unwrap(), l);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad_subtype = ONE_DESTROYED.replace("destroyed", "obliterated");
        assert!(matches!(parse_scene_label(&bad_subtype), Err(LabelError::UnknownSubtype(_))));
        let no_width = ONE_DESTROYED.replace(r#""width":1024,"#, "");
        assert!(matches!(parse_scene_label(&no_width), Err(LabelError::MissingMetadata("width"))));
        assert!(matches!(parse_scene_label("{"), Err(LabelError::Json(_))));
        let zero = ONE_DESTROYED.replace(r#""height":1024"#, r#""height":0"#);
        assert!(matches!(parse_scene_label(&zero), Err(LabelError::BadDimensions(1024, 0))));
    }

    #[test]
    fn duplicate_uid_rejected() {
        let text = r#"{"metadata":{"disaster":"x","width":16,"height":16,"id":"e"},"features":{"xy":[
            {"wkt":"POLYGON ((0 0, 1 0, 1 1, 0 0))","properties":{"uid":"a"}},
            {"wkt":"POLYGON ((2 2, 3 2, 3 3, 2 2))","properties":{"uid":"a"}}]}}"#;
        assert!(matches!(parse_scene_label(text), Err(LabelError::DuplicateUid(_))));
    }

    #[test]
    fn out_of_bounds_clamped_with_warning() {
        let text = ONE_DESTROYED.replace("10 0, 10 10", "1030 0, 1030 10");
        let (l, warnings) = parse_scene_label_with_warnings(&text).unwrap();
        assert_eq!(warnings, vec![LabelWarning::Clamped { uid: "b1".into() }]);
        assert_eq!(l.buildings[0].footprint.bbox().max_x, 1024.0);
    }

    #[test]
    fn non_building_features_skipped() {
        let text = ONE_DESTROYED.replace(r#""feature_type":"building""#, r#""feature_type":"road""#);
        assert!(parse_scene_label(&text).unwrap().buildings.is_empty());
    }

    fn arb_label() -> impl Strategy<Value = SceneLabel> {
        let building = (
            0.0f64..900.0,
            0.0f64..900.0,
            1.0f64..100.0,
            1.0f64..100.0,
            prop_oneof![
                Just(DamageLabel::Unlabeled),
                Just(DamageLabel::Unclassified),
                (0u8..4).prop_map(|o| DamageLabel::Assessed(DamageClass::from_ordinal(o).unwrap())),
            ],
        );
        ("[a-z0-9_-]{1,12}", "[a-z-]{1,16}", 1u32..2048, 1u32..2048, prop::collection::vec(building, 0..8))
            .prop_map(|(id, dis, w, h, bs)| {
                let mut l = SceneLabel::new(id, dis, w, h).unwrap();
                for (i, (x, y, bw, bh, lab)) in bs.into_iter().enumerate() {
                    let p = Polygon::rectangle(x, y, x + bw, y + bh).unwrap();
                    let (p, _) = p.clamped(w, h);
                    if let Ok(p) = Polygon::new(p.exterior().to_vec(), vec![]) {
                        l.buildings.push(BuildingAnnotation { uid: format!("u{i}"), footprint: p, label: lab });
                    }
                }
                l
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_identity(l in arb_label()) {
            let (back, warnings) = parse_scene_label_with_warnings(&l.to_json()).unwrap();
            prop_assert!(warnings.is_empty());
            prop_assert_eq!(back, l);
        }
    }
}
