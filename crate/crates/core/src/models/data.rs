//! Turning labelled scenes into training samples.

use super::{BranchInput, ClassifierConfig, ClassifierSample, ExtraBranch, ModelError, SegNetConfig, SegSample};
use crate::imaging::{ssim, subtract, ImageBuffer, SsimParams};
use crate::labels::SceneLabel;
use crate::raster::{crop_building, rasterize_label, CropSpec};

/// One sample per assessed building of a scene. Unlabeled and un-classified buildings are skipped.
///
/// `disaster` is required when the classifier has a disaster branch.
pub fn building_samples(
    config: &ClassifierConfig,
    pre: &ImageBuffer,
    post: &ImageBuffer,
    label: &SceneLabel,
    disaster: Option<usize>,
    padding_fraction: f64,
) -> Result<Vec<ClassifierSample>, ModelError> {
    let spec = CropSpec::new(padding_fraction, config.tower.input_side as u32)?;
    let mut out = Vec::new();
    for (b, class) in label.assessed() {
        let pre_patch = crop_building(pre, &b.footprint, &spec)?;
        let post_patch = crop_building(post, &b.footprint, &spec)?;
        let extra = match config.branch {
            ExtraBranch::None => BranchInput::None,
            ExtraBranch::DisasterOneHot(_) => {
                BranchInput::Disaster(disaster.ok_or_else(|| ModelError::Input("disaster index required".into()))?)
            }
            ExtraBranch::SsimScalar => BranchInput::Ssim(ssim(&pre_patch, &post_patch, &SsimParams::default())?),
        };
        out.push(ClassifierSample::new(config, &pre_patch, &post_patch, extra, class)?);
    }
    Ok(out)
}

/// Building/background target on the pre image.
pub fn footprint_sample(config: &SegNetConfig, pre: &ImageBuffer, label: &SceneLabel) -> Result<SegSample, ModelError> {
    let mask = rasterize_label(label)?.mask.binarize();
    SegSample::new(config, pre, mask.data())
}

/// 5-class target on the post − pre difference.
pub fn end_to_end_sample(
    config: &SegNetConfig,
    pre: &ImageBuffer,
    post: &ImageBuffer,
    label: &SceneLabel,
) -> Result<SegSample, ModelError> {
    let mask = rasterize_label(label)?.mask;
    SegSample::new(config, &subtract(pre, post)?, mask.data())
}
