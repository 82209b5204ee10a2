use rayon::prelude::*;

use super::{BranchInput, ClassifierModel, ExtraBranch, ModelError, SegNet};
use crate::imaging::{ssim, ImageBuffer, SsimParams};
use crate::labels::{DamageClass, Polygon};
use crate::raster::{crop_building, polygonize, rasterize, BinaryMask, CropSpec, Mask};

/// Components smaller than this many pixels are dropped before classification.
pub const MIN_BUILDING_AREA: usize = 4;

/// First stage: building footprints from the pre-disaster image.
pub trait Segmenter: Sync {
    fn segment(&self, pre: &ImageBuffer) -> Result<BinaryMask, ModelError>;
}

/// One predicted building handed to the second stage.
#[derive(Debug, Clone)]
pub struct BuildingCrop<'a> {
    pub footprint: &'a Polygon,
    pub pre: ImageBuffer,
    pub post: ImageBuffer,
}

/// Second stage: damage class of one building.
pub trait BuildingClassifier: Sync {
    fn classify(&self, crop: &BuildingCrop) -> Result<DamageClass, ModelError>;
}

impl Segmenter for SegNet {
    fn segment(&self, pre: &ImageBuffer) -> Result<BinaryMask, ModelError> {
        if self.config().classes != 2 {
            return Err(ModelError::Config("footprint segmenter needs 2 classes".into()));
        }
        let classes = self.predict(pre)?;
        Ok(BinaryMask::from_vec(pre.width(), pre.height(), classes)?)
    }
}

/// A trained [`ClassifierModel`] plus what its extra branch needs for the current scene.
pub struct NetworkClassifier<'a> {
    pub model: &'a ClassifierModel,
    /// Disaster index for the one-hot branch; required when the model has one.
    pub disaster: Option<usize>,
    pub ssim: SsimParams,
}

impl<'a> NetworkClassifier<'a> {
    pub fn new(model: &'a ClassifierModel, disaster: Option<usize>) -> Self {
        Self { model, disaster, ssim: SsimParams::default() }
    }
}

impl BuildingClassifier for NetworkClassifier<'_> {
    fn classify(&self, crop: &BuildingCrop) -> Result<DamageClass, ModelError> {
        let extra = match self.model.config().branch {
            ExtraBranch::None => BranchInput::None,
            ExtraBranch::DisasterOneHot(_) => BranchInput::Disaster(
                self.disaster.ok_or_else(|| ModelError::Input("model needs a disaster index".into()))?,
            ),
            ExtraBranch::SsimScalar => BranchInput::Ssim(ssim(&crop.pre, &crop.post, &self.ssim)?),
        };
        self.model.predict_class(&crop.pre, &crop.post, extra)
    }
}

/// Segment, polygonize, crop, classify, paint.
///
/// Each predicted footprint is painted with its predicted class (mask value 1–4);
/// everything else is background.
pub fn run_two_step(
    pre: &ImageBuffer,
    post: &ImageBuffer,
    segmenter: &dyn Segmenter,
    classifier: &dyn BuildingClassifier,
    crop_spec: &CropSpec,
) -> Result<Mask, ModelError> {
    if pre.shape() != post.shape() {
        return Err(ModelError::Input(format!("pre {:?} and post {:?} differ", pre.shape(), post.shape())));
    }
    let (w, h) = (pre.width(), pre.height());
    let footprints = segmenter.segment(pre)?;
    if (footprints.width(), footprints.height()) != (w, h) {
        return Err(ModelError::Input("segmenter output size differs from the image".into()));
    }
    let polygons: Vec<Polygon> =
        polygonize(&footprints.to_mask(), MIN_BUILDING_AREA).into_iter().map(|(p, _)| p).collect();
    let classes = polygons
        .par_iter()
        .map(|footprint| {
            let crop = BuildingCrop {
                footprint,
                pre: crop_building(pre, footprint, crop_spec)?,
                post: crop_building(post, footprint, crop_spec)?,
            };
            classifier.classify(&crop)
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let painted: Vec<(Polygon, u8)> =
        polygons.into_iter().zip(classes).map(|(p, c)| (p, c.mask_value())).collect();
    Ok(rasterize(&painted, w, h)?)
}
