//! Toy-scale networks built on [`crate::autodiff`].
//!
//! - [`ClassifierModel`]: twin-tower damage classifier over pre/post building crops,
//!   with an optional third input (disaster one-hot or an SSIM scalar).
//! - [`DisasterClassifier`]: single tower over the 6-channel pre⧺post scene.
//! - [`SegNet`]: small encoder/decoder giving per-pixel logits; used with 5 classes
//!   on the difference image (end-to-end) and with 2 classes on the pre image
//!   (building segmenter of the two-step pipeline).
//!
//! All models read raw `[0, 255]` images and scale them to `[0, 1]` internally.

mod classifier;
mod config;
mod data;
mod disaster;
mod pipeline;
mod segnet;
mod tower;
mod train;

pub use classifier::{BranchInput, ClassifierConfig, ClassifierModel, ClassifierSample, ExtraBranch};
pub use config::{BranchKind, TrainConfig};
pub use data::{building_samples, end_to_end_sample, footprint_sample};
pub use disaster::{DisasterClassifier, DisasterConfig, DisasterSample};
pub use pipeline::{
    run_two_step, BuildingClassifier, BuildingCrop, NetworkClassifier, Segmenter, MIN_BUILDING_AREA,
};
pub use segnet::{difference_input, segment_end_to_end, SegNet, SegNetConfig, SegSample};
pub use tower::{ConvBlock, TowerConfig};
pub use train::{
    accuracy, fit, train_classifier, train_disaster_classifier, train_segmenter, EpochRecord, History, Trainable,
};

use thiserror::Error;

use crate::autodiff::{AutodiffError, Graph, ParamStore, Var};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Imaging(#[from] crate::imaging::ImagingError),
    #[error(transparent)]
    Raster(#[from] crate::raster::RasterError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("input mismatch: {0}")]
    Input(String),
    #[error("empty training set")]
    EmptyDataset,
    #[error("loss became non-finite in epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ModelError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

/// Parameters of a store recorded as leaves on one graph, looked up by name.
pub struct Bound<'a> {
    store: &'a ParamStore,
    vars: Vec<Var>,
}

impl<'a> Bound<'a> {
    pub fn new(store: &'a ParamStore, g: &mut Graph) -> Result<Self, AutodiffError> {
        Ok(Self { store, vars: store.bind(g)? })
    }

    pub fn var(&self, name: &str) -> Var {
        let i = self.store.index_of(name).unwrap_or_else(|| panic!("model has no parameter {name}"));
        self.vars[i]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// First index of the largest value.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
