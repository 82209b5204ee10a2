//! Confusion-matrix scoring: IoU, F1, weighted F1, and the combined challenge score.
//!
//! Rows of a [`ConfusionMatrix`] are ground truth, columns are predictions. Every
//! score here is derived from a matrix, never from masks directly.

mod score;

use thiserror::Error;

use crate::labels::{DamageClass, Polygon};
use crate::raster::{rasterize, BinaryMask, Mask};

pub use score::{score_dataset, score_masks, ScoreReport};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("mask dimensions differ: prediction {pred:?}, ground truth {gt:?}")]
    DimensionMismatch { pred: (u32, u32), gt: (u32, u32) },
    #[error("class {class} out of range for a {k}-class matrix")]
    ClassOutOfRange { class: usize, k: usize },
    #[error("matrices have different class counts ({0} vs {1})")]
    ShapeMismatch(usize, usize),
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("no class has any ground truth or prediction")]
    Empty,
    #[error("score {0} outside [0,1]")]
    OutOfRange(f64),
    #[error("no prediction for scene {0:?}")]
    MissingPrediction(String),
    #[error(transparent)]
    Raster(#[from] crate::raster::RasterError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(k: usize) -> Self {
        Self { k, counts: vec![0; k * k] }
    }

    pub fn from_counts(k: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), k * k, "counts must be k*k");
        Self { k, counts }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.k + pred]
    }

    pub fn add(&mut self, gt: usize, pred: usize, n: u64) -> Result<(), MetricsError> {
        for class in [gt, pred] {
            if class >= self.k {
                return Err(MetricsError::ClassOutOfRange { class, k: self.k });
            }
        }
        self.counts[gt * self.k + pred] += n;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, gt: usize) -> u64 {
        self.counts[gt * self.k..(gt + 1) * self.k].iter().sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        (0..self.k).map(|r| self.get(r, pred)).sum()
    }

    /// Elementwise sum; associative and commutative.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<(), MetricsError> {
        if self.k != other.k {
            return Err(MetricsError::ShapeMismatch(self.k, other.k));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Adds one count per pixel at (gt, pred).
    pub fn accumulate(&mut self, pred: &Mask, gt: &Mask) -> Result<(), MetricsError> {
        self.accumulate_where(pred, gt, None)
    }

    /// As [`accumulate`](Self::accumulate) but skipping pixels set in `ignore`.
    pub fn accumulate_where(&mut self, pred: &Mask, gt: &Mask, ignore: Option<&BinaryMask>) -> Result<(), MetricsError> {
        let dims = |w: u32, h: u32| (w, h);
        if dims(pred.width(), pred.height()) != dims(gt.width(), gt.height())
            || ignore.is_some_and(|i| (i.width(), i.height()) != (gt.width(), gt.height()))
        {
            return Err(MetricsError::DimensionMismatch {
                pred: (pred.width(), pred.height()),
                gt: (gt.width(), gt.height()),
            });
        }
        let mut local = vec![0u64; self.k * self.k];
        for (i, (&p, &g)) in pred.data().iter().zip(gt.data()).enumerate() {
            if ignore.is_some_and(|m| m.data()[i] != 0) {
                continue;
            }
            let (p, g) = (usize::from(p), usize::from(g));
            if p >= self.k || g >= self.k {
                return Err(MetricsError::ClassOutOfRange { class: p.max(g), k: self.k });
            }
            local[g * self.k + p] += 1;
        }
        for (a, b) in self.counts.iter_mut().zip(local) {
            *a += b;
        }
        Ok(())
    }

    /// Two-class building/background matrix (any nonzero class is "building").
    pub fn binarized(&self) -> ConfusionMatrix {
        let mut out = ConfusionMatrix::new(2);
        for g in 0..self.k {
            for p in 0..self.k {
                out.counts[usize::from(g != 0) * 2 + usize::from(p != 0)] += self.get(g, p);
            }
        }
        out
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `TP/(TP+FP+FN)` per class; `None` where the class never occurs in either axis.
pub fn per_class_iou(cm: &ConfusionMatrix) -> Vec<Option<f64>> {
    (0..cm.k)
        .map(|c| {
            let tp = cm.get(c, c);
            let den = cm.row_sum(c) + cm.col_sum(c) - tp;
            (den > 0).then(|| tp as f64 / den as f64)
        })
        .collect()
}

/// Mean IoU over classes that occur in ground truth or prediction.
pub fn miou(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    if cm.k < 2 {
        return Err(MetricsError::TooFewClasses(cm.k));
    }
    let present: Vec<f64> = per_class_iou(cm).into_iter().flatten().collect();
    if present.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

/// F1 of one class `2TP/(2TP+FP+FN)` counting only rows/columns listed in `classes`
/// as false positives; false negatives use the full row.
fn f1_within(cm: &ConfusionMatrix, c: usize, classes: &[usize]) -> f64 {
    let tp = cm.get(c, c);
    let fn_ = cm.row_sum(c) - tp;
    let fp: u64 = classes.iter().filter(|&&r| r != c).map(|&r| cm.get(r, c)).sum();
    ratio(2 * tp, 2 * tp + fp + fn_)
}

pub fn per_class_f1(cm: &ConfusionMatrix) -> Vec<f64> {
    let all: Vec<usize> = (0..cm.k).collect();
    all.iter().map(|&c| f1_within(cm, c, &all)).collect()
}

/// Support-weighted mean of per-class F1 over `classes`.
///
/// Ground-truth pixels of those classes predicted as any other class (including
/// classes outside the set) count as false negatives; predictions are only false
/// positives when their ground truth is inside the set.
pub fn weighted_f1_over(cm: &ConfusionMatrix, classes: &[usize]) -> Result<(f64, Vec<f64>), MetricsError> {
    if let Some(&class) = classes.iter().find(|&&c| c >= cm.k) {
        return Err(MetricsError::ClassOutOfRange { class, k: cm.k });
    }
    let f1: Vec<f64> = classes.iter().map(|&c| f1_within(cm, c, classes)).collect();
    let support: Vec<u64> = classes.iter().map(|&c| cm.row_sum(c)).collect();
    let total: u64 = support.iter().sum();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let weighted = f1.iter().zip(&support).map(|(f, s)| f * *s as f64).sum::<f64>() / total as f64;
    Ok((weighted, f1))
}

/// Support-weighted mean F1 over all classes.
pub fn weighted_f1(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let all: Vec<usize> = (0..cm.k).collect();
    weighted_f1_over(cm, &all).map(|(w, _)| w)
}

/// Challenge score: `0.3 * segmentation F1 + 0.7 * classification F1`.
pub fn combined_score(seg_f1: f64, cls_f1: f64) -> Result<f64, MetricsError> {
    for v in [seg_f1, cls_f1] {
        if !(0.0..=1.0).contains(&v) {
            return Err(MetricsError::OutOfRange(v));
        }
    }
    Ok(0.3 * seg_f1 + 0.7 * cls_f1)
}

/// Per-building damage agreement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildingScores {
    /// 4×4 over damage ordinals.
    pub matrix: ConfusionMatrix,
    /// Buildings whose footprint holds no predicted building pixel.
    pub missed: usize,
}

/// Each ground-truth building takes the majority predicted class inside its footprint.
pub fn building_level_scores(pred: &Mask, gt_buildings: &[(Polygon, DamageClass)]) -> Result<BuildingScores, MetricsError> {
    let mut matrix = ConfusionMatrix::new(4);
    let mut missed = 0;
    for (footprint, damage) in gt_buildings {
        let fp = rasterize(&[(footprint.clone(), 1)], pred.width(), pred.height())?;
        let inside = fp.data().iter().zip(pred.data()).filter(|(f, _)| **f != 0).map(|(_, p)| *p);
        match crate::raster::majority_class(inside).and_then(DamageClass::from_mask_value) {
            Some(c) => matrix.add(usize::from(damage.ordinal()), usize::from(c.ordinal()), 1)?,
            None => missed += 1,
        }
    }
    Ok(BuildingScores { matrix, missed })
}
