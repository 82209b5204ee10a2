//! Desk-scale toolkit for two-step post-disaster building damage assessment.
//!
//! The pipeline segments building footprints from the pre-disaster image,
//! polygonizes the mask, crops each building from the pre and post images,
//! and classifies its damage with a small twin-tower network. Scoring follows
//! the xView2 convention: `0.3 * segmentation F1 + 0.7 * classification F1`.
//!
//! Modules:
//! - [`labels`]: xBD-style annotation JSON, manifests, dataset statistics
//! - [`raster`]: polygon fill, connected components, boundary tracing, crops
//! - [`imaging`]: image buffers, differencing, SSIM, bilinear resize
//! - [`metrics`]: confusion matrices, IoU/F1, the combined score
//! - [`split`]: seeded per-disaster train/validation split
//! - [`autodiff`]: a small reverse-mode tensor engine
//! - [`models`]: twin-tower classifier, disaster classifier, segmenters, the two-step pipeline
//! - [`synth`]: synthetic paired scenes standing in for real imagery

pub mod autodiff;
pub mod cli;
pub mod imaging;
pub mod labels;
pub mod metrics;
pub mod models;
pub mod raster;
pub mod rng;
pub mod split;
pub mod synth;

pub use labels::{DamageClass, Polygon, SceneLabel};
pub use raster::{BinaryMask, Mask};
