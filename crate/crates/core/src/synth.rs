//! Synthetic paired scenes: flat-roofed rectangular buildings on a noisy ground,
//! with per-building damage rendered into the post image.
//!
//! Rendering of a building's post pixels by damage class:
//!
//! | class        | post roof                                                  |
//! |--------------|------------------------------------------------------------|
//! | no-damage    | identical to pre                                           |
//! | minor-damage | pre × (1 − 0.2v), with 15% of pixels speckled to × (1 − 0.4v) |
//! | major-damage | pre × (1 − 0.45v), with 35% of pixels erased to × (1 − 0.8v) |
//! | destroyed    | brown rubble, luma roughly 10–45, independent of the roof  |
//!
//! `v` is the disaster's damage visibility in `[0.4, 1]`. Low visibility makes damage
//! subtle, so the same change can mean minor damage in one disaster and major in another.
//!
//! Roof luma is kept in `[140, 235]`, which makes the per-building mean post luma
//! strictly decrease with damage class. Everything outside buildings is the same in
//! pre and post.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{ImageBuffer, ImagingError};
use crate::labels::{BuildingAnnotation, DamageClass, DamageLabel, DatasetManifest, LabelError, ManifestEntry, Polygon, SceneLabel};
use crate::rng::XorShift64Star;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid disaster spec {name:?}: {reason}")]
    BadSpec { name: String, reason: String },
    #[error("scene side {0} is below the minimum of 64")]
    SideTooSmall(u32),
    #[error("no disaster specs given")]
    NoSpecs,
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub const MIN_SIDE: u32 = 64;
const ROOF_LUMA: (f64, f64) = (140.0, 235.0);
const PLACEMENT_TRIES: usize = 50;

fn luma(c: [f64; 3]) -> f64 {
    0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]
}

/// How one disaster's scenes look and how its buildings are damaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisasterSpec {
    pub name: String,
    pub ground: [f64; 3],
    pub roof: [f64; 3],
    /// Probability of each damage class, no-damage first.
    pub damage_distribution: [f64; 4],
    /// Inclusive range of buildings per scene.
    pub building_count_range: (u32, u32),
    /// Inclusive range of building side lengths in pixels.
    pub building_size_range: (u32, u32),
    /// Strength of minor and major damage rendering, in `[0.4, 1]`.
    #[serde(default = "full_visibility")]
    pub damage_visibility: f64,
}

fn full_visibility() -> f64 {
    1.0
}

impl DisasterSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |reason: &str| Err(SynthError::BadSpec { name: self.name.clone(), reason: reason.into() });
        if self.name.is_empty() || self.name.contains(['/', '\\', ',']) {
            return bad("name must be nonempty without '/', '\\' or ','");
        }
        let p = &self.damage_distribution;
        if p.iter().any(|v| v.is_nan() || *v < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("damage probabilities must be nonnegative and sum to 1");
        }
        let (c0, c1) = self.building_count_range;
        let (s0, s1) = self.building_size_range;
        if c0 > c1 || s0 > s1 {
            return bad("empty range");
        }
        if s0 < 2 {
            return bad("buildings must be at least 2 pixels wide");
        }
        if self.ground.iter().chain(&self.roof).any(|v| !(0.0..=255.0).contains(v)) {
            return bad("colors must lie in [0, 255]");
        }
        if !(0.4..=1.0).contains(&self.damage_visibility) {
            return bad("damage visibility must lie in [0.4, 1]");
        }
        let l = luma(self.roof);
        if !(ROOF_LUMA.0..=ROOF_LUMA.1).contains(&l) {
            return bad("roof luma must lie in [140, 235]");
        }
        Ok(())
    }

    /// Four disasters with distinct grounds and damage mixes; the first is mostly destroyed.
    /// Roofs share one color, so a building crop says little about its disaster.
    /// Flood and earthquake damage is rendered faintly.
    pub fn presets() -> Vec<DisasterSpec> {
        const ROOF: [f64; 3] = [200.0, 190.0, 170.0];
        let spec = |name: &str, ground, dist, visibility| DisasterSpec {
            name: name.into(),
            ground,
            roof: ROOF,
            damage_distribution: dist,
            building_count_range: (4, 9),
            building_size_range: (5, 12),
            damage_visibility: visibility,
        };
        vec![
            spec("synthetic-hurricane", [70.0, 110.0, 60.0], [0.15, 0.15, 0.15, 0.55], 1.0),
            spec("synthetic-wildfire", [150.0, 120.0, 80.0], [0.55, 0.1, 0.1, 0.25], 1.0),
            spec("synthetic-flood", [90.0, 100.0, 130.0], [0.35, 0.4, 0.2, 0.05], 0.4),
            spec("synthetic-earthquake", [140.0, 140.0, 135.0], [0.8, 0.08, 0.07, 0.05], 0.5),
        ]
    }
}

/// One generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneBundle {
    pub pre: ImageBuffer,
    pub post: ImageBuffer,
    pub label: SceneLabel,
}

fn quantize(v: f64) -> f64 {
    v.round().clamp(0.0, 255.0)
}

/// Axis-aligned pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
}

impl Rect {
    /// True if the rectangles overlap or touch, including diagonally.
    fn too_close(&self, o: &Rect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }
}

fn place(spec: &DisasterSpec, side: u32, rng: &mut XorShift64Star) -> Vec<Rect> {
    let (c0, c1) = spec.building_count_range;
    let (s0, s1) = spec.building_size_range;
    let wanted = rng.range_inclusive(c0, c1);
    let max_side = s1.min(side);
    let mut rects: Vec<Rect> = Vec::new();
    for _ in 0..wanted {
        let mut placed = false;
        for _ in 0..PLACEMENT_TRIES {
            let w = rng.range_inclusive(s0.min(max_side), max_side);
            let h = rng.range_inclusive(s0.min(max_side), max_side);
            let x0 = rng.range_inclusive(0, side - w);
            let y0 = rng.range_inclusive(0, side - h);
            let r = Rect { x0, y0, x1: x0 + w, y1: y0 + h };
            if !rects.iter().any(|o| r.too_close(o)) {
                rects.push(r);
                placed = true;
                break;
            }
        }
        if !placed {
            log::warn!("{}: placed {} of {wanted} buildings", spec.name, rects.len());
            break;
        }
    }
    rects
}

fn render_damage(post: &mut ImageBuffer, r: &Rect, class: DamageClass, v: f64, rng: &mut XorShift64Star) {
    let pixels: Vec<(u32, u32)> = (r.y0..r.y1).flat_map(|y| (r.x0..r.x1).map(move |x| (x, y))).collect();
    let scale = |post: &mut ImageBuffer, (x, y): (u32, u32), f: f64| {
        let px: Vec<f64> = post.pixel(x, y).iter().map(|v| quantize(v * f)).collect();
        post.set_pixel(x, y, &px);
    };
    let (base, special, fraction) = match class {
        DamageClass::NoDamage => return,
        DamageClass::MinorDamage => (1.0 - 0.2 * v, 1.0 - 0.4 * v, 0.15),
        DamageClass::MajorDamage => (1.0 - 0.45 * v, 1.0 - 0.8 * v, 0.35),
        DamageClass::Destroyed => {
            for (x, y) in pixels {
                let v = rng.uniform(10.0, 45.0);
                post.set_pixel(x, y, &[quantize(v * 1.1), quantize(v), quantize(v * 0.85)]);
            }
            return;
        }
    };
    let mut order: Vec<usize> = (0..pixels.len()).collect();
    rng.shuffle(&mut order);
    let n_special = (fraction * pixels.len() as f64).round() as usize;
    for (rank, i) in order.into_iter().enumerate() {
        scale(post, pixels[i], if rank < n_special { special } else { base });
    }
}

/// Renders one scene. Deterministic in `(spec, side, seed)`.
pub fn generate_scene(spec: &DisasterSpec, side: u32, seed: u64) -> Result<SceneBundle, SynthError> {
    spec.validate()?;
    if side < MIN_SIDE {
        return Err(SynthError::SideTooSmall(side));
    }
    let mut rng = XorShift64Star::new(seed);
    let mut pre = ImageBuffer::filled(side, side, 3, 0.0)?;
    for y in 0..side {
        for x in 0..side {
            let px: Vec<f64> = spec.ground.iter().map(|c| quantize(c + rng.uniform(-10.0, 10.0))).collect();
            pre.set_pixel(x, y, &px);
        }
    }
    let rects = place(spec, side, &mut rng);
    let mut classes = Vec::with_capacity(rects.len());
    for r in &rects {
        let shift = rng.uniform(-3.0, 3.0);
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                let px: Vec<f64> = spec.roof.iter().map(|c| quantize(c + shift + rng.uniform(-4.0, 4.0))).collect();
                pre.set_pixel(x, y, &px);
            }
        }
        classes.push(DamageClass::ALL[rng.categorical(&spec.damage_distribution)]);
    }
    let mut post = pre.clone();
    let mut label = SceneLabel::new(format!("{}_{seed:016x}", spec.name), spec.name.clone(), side, side)?;
    for (i, (r, class)) in rects.iter().zip(&classes).enumerate() {
        render_damage(&mut post, r, *class, spec.damage_visibility, &mut rng);
        let footprint = Polygon::rectangle(f64::from(r.x0), f64::from(r.y0), f64::from(r.x1), f64::from(r.y1))?;
        label.buildings.push(BuildingAnnotation {
            uid: format!("b{i:03}"),
            footprint,
            label: DamageLabel::Assessed(*class),
        });
    }
    Ok(SceneBundle { pre, post, label })
}

/// Seed of scene `index` of disaster `name` within a dataset.
pub fn scene_seed(seed: u64, name: &str, index: usize) -> u64 {
    XorShift64Star::substream(seed, &format!("{name}/{index}")).next_u64()
}

/// Writes `images/`, `labels/` and `manifest.csv` under `out` and returns the manifest.
///
/// Scene ids are `<disaster>_<index:05>`.
pub fn generate_dataset(
    specs: &[DisasterSpec],
    scenes_per_disaster: usize,
    side: u32,
    seed: u64,
    out: &Path,
) -> Result<DatasetManifest, SynthError> {
    if specs.is_empty() {
        return Err(SynthError::NoSpecs);
    }
    for s in specs {
        s.validate()?;
    }
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| SynthError::Io { path, source }
    };
    let images = out.join("images");
    let labels = out.join("labels");
    std::fs::create_dir_all(&images).map_err(io(&images))?;
    std::fs::create_dir_all(&labels).map_err(io(&labels))?;
    let jobs: Vec<(&DisasterSpec, usize)> =
        specs.iter().flat_map(|s| (0..scenes_per_disaster).map(move |i| (s, i))).collect();
    let entries = jobs
        .par_iter()
        .map(|(spec, i)| {
            let id = format!("{}_{i:05}", spec.name);
            let mut scene = generate_scene(spec, side, scene_seed(seed, &spec.name, *i))?;
            scene.label.scene_id = id.clone();
            let entry = ManifestEntry {
                scene_id: id.clone(),
                disaster_name: spec.name.clone(),
                pre_image: images.join(format!("{id}_pre.png")),
                post_image: images.join(format!("{id}_post.png")),
                label: labels.join(format!("{id}.json")),
            };
            scene.pre.write_png(&entry.pre_image)?;
            scene.post.write_png(&entry.post_image)?;
            scene.label.write(&entry.label)?;
            Ok(entry)
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    let manifest = DatasetManifest::new(entries)?;
    manifest.write(&out.join("manifest.csv"))?;
    Ok(manifest)
}
