use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{building_level_scores, combined_score, per_class_iou, weighted_f1_over, ConfusionMatrix, MetricsError};
use crate::labels::SceneLabel;
use crate::raster::{rasterize_label, LabelRaster, Mask};

const DAMAGE_CLASSES: [usize; 4] = [1, 2, 3, 4];

/// Scores for a whole prediction set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    /// F1 of the building (positive) vs background problem.
    pub seg_f1: f64,
    /// Support-weighted F1 over damage classes, on ground-truth building pixels.
    pub cls_f1_weighted: f64,
    /// F1 per damage class, no-damage first.
    pub per_class_f1: [f64; 4],
    /// IoU per mask class 0..=4; `None` for classes absent from both sides.
    pub per_class_iou: Vec<Option<f64>>,
    pub miou: f64,
    pub combined: f64,
    /// Same weighted F1, but one vote per ground-truth building.
    pub building_cls_f1_weighted: Option<f64>,
    pub buildings_missed: usize,
    pub pixel_matrix: ConfusionMatrix,
}

fn f5(out: &mut String, v: f64) {
    write!(out, "{v:.5}").unwrap();
}

impl ScoreReport {
    /// Compact JSON with every score printed to 5 fixed decimals.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n  \"seg_f1\": ");
        f5(&mut s, self.seg_f1);
        s.push_str(",\n  \"cls_f1_weighted\": ");
        f5(&mut s, self.cls_f1_weighted);
        s.push_str(",\n  \"per_class_f1\": [");
        for (i, v) in self.per_class_f1.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            f5(&mut s, *v);
        }
        s.push_str("],\n  \"per_class_iou\": [");
        for (i, v) in self.per_class_iou.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            match v {
                Some(v) => f5(&mut s, *v),
                None => s.push_str("null"),
            }
        }
        s.push_str("],\n  \"miou\": ");
        f5(&mut s, self.miou);
        s.push_str(",\n  \"combined\": ");
        f5(&mut s, self.combined);
        s.push_str(",\n  \"building_cls_f1_weighted\": ");
        match self.building_cls_f1_weighted {
            Some(v) => f5(&mut s, v),
            None => s.push_str("null"),
        }
        write!(s, ",\n  \"buildings_missed\": {}\n}}\n", self.buildings_missed).unwrap();
        s
    }
}

struct SceneTally {
    pixels: ConfusionMatrix,
    buildings: ConfusionMatrix,
    missed: usize,
}

fn tally(pred: &Mask, gt_label: &SceneLabel, gt: &LabelRaster) -> Result<SceneTally, MetricsError> {
    let mut pixels = ConfusionMatrix::new(5);
    pixels.accumulate_where(pred, &gt.mask, Some(&gt.ignore))?;
    let assessed: Vec<_> = gt_label.assessed().map(|(b, d)| (b.footprint.clone(), d)).collect();
    let b = building_level_scores(pred, &assessed)?;
    Ok(SceneTally { pixels, buildings: b.matrix, missed: b.missed })
}

/// Scores already-rasterized scenes; see [`score_dataset`].
pub fn score_masks(scenes: &[(&Mask, &SceneLabel, &LabelRaster)]) -> Result<ScoreReport, MetricsError> {
    let tallies: Vec<SceneTally> =
        scenes.par_iter().map(|(p, l, g)| tally(p, l, g)).collect::<Result<_, _>>()?;
    let mut pixels = ConfusionMatrix::new(5);
    let mut buildings = ConfusionMatrix::new(4);
    let mut missed = 0;
    for t in &tallies {
        pixels.merge(&t.pixels)?;
        buildings.merge(&t.buildings)?;
        missed += t.missed;
    }
    report_from(pixels, buildings, missed)
}

fn report_from(pixels: ConfusionMatrix, buildings: ConfusionMatrix, missed: usize) -> Result<ScoreReport, MetricsError> {
    let bin = pixels.binarized();
    let (tp, fp, fn_) = (bin.get(1, 1), bin.get(0, 1), bin.get(1, 0));
    let seg_f1 = if 2 * tp + fp + fn_ == 0 { 0.0 } else { (2 * tp) as f64 / (2 * tp + fp + fn_) as f64 };
    let (cls_f1_weighted, f1) = match weighted_f1_over(&pixels, &DAMAGE_CLASSES) {
        Ok(v) => v,
        Err(MetricsError::Empty) => (0.0, vec![0.0; 4]),
        Err(e) => return Err(e),
    };
    let iou = per_class_iou(&pixels);
    let present: Vec<f64> = iou.iter().flatten().copied().collect();
    let miou = if present.is_empty() { 0.0 } else { present.iter().sum::<f64>() / present.len() as f64 };
    let building_cls_f1_weighted = weighted_f1_over(&buildings, &[0, 1, 2, 3]).ok().map(|(w, _)| w);
    Ok(ScoreReport {
        seg_f1,
        cls_f1_weighted,
        per_class_f1: [f1[0], f1[1], f1[2], f1[3]],
        per_class_iou: iou,
        miou,
        combined: combined_score(seg_f1, cls_f1_weighted)?,
        building_cls_f1_weighted,
        buildings_missed: missed,
        pixel_matrix: pixels,
    })
}

/// Micro-averaged scores over every scene: one global pixel matrix.
///
/// Pixels of un-classified buildings are skipped. Every labelled scene needs a prediction.
pub fn score_dataset(gt: &[SceneLabel], pred: &HashMap<String, Mask>) -> Result<ScoreReport, MetricsError> {
    let rasters: Vec<LabelRaster> = gt.par_iter().map(rasterize_label).collect::<Result<_, _>>()?;
    let mut scenes = Vec::with_capacity(gt.len());
    for (label, raster) in gt.iter().zip(&rasters) {
        let p = pred.get(&label.scene_id).ok_or_else(|| MetricsError::MissingPrediction(label.scene_id.clone()))?;
        scenes.push((p, label, raster));
    }
    score_masks(&scenes)
}
