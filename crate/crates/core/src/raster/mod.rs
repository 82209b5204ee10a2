//! Dense class masks and the polygon <-> mask conversions around them.

mod components;
mod crop;
mod fill;
mod polygonize;
mod trace;

use std::path::Path;

use thiserror::Error;

use crate::labels::LabelError;

pub use components::{connected_components, Component};
pub use crop::{crop_building, crop_region, CropSpec};
pub use fill::{rasterize, rasterize_label, LabelRaster};
pub use polygonize::{majority_class, polygonize};
pub use trace::trace_boundary;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("class {0} outside 1..=4")]
    BadClass(u8),
    #[error("mask value {value} exceeds {max}")]
    ValueOutOfRange { value: u8, max: u8 },
    #[error("mask data length {got} does not match {width}x{height}")]
    BadLength { got: usize, width: u32, height: u32 },
    #[error("mask dimensions must be positive")]
    EmptyMask,
    #[error("bounding box has zero area")]
    ZeroAreaBox,
    #[error("invalid crop spec: {0}")]
    BadCropSpec(&'static str),
    #[error(transparent)]
    Polygon(#[from] LabelError),
    #[error(transparent)]
    Imaging(#[from] crate::imaging::ImagingError),
    #[error("{0}")]
    Codec(#[from] image::ImageError),
}

/// Row-major grid of small class ids, every value `<= MAX`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassGrid<const MAX: u8> {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

/// Per-pixel classes: 0 background, 1..=4 damage (ordinal + 1).
pub type Mask = ClassGrid<4>;
/// Building (1) vs background (0).
pub type BinaryMask = ClassGrid<1>;

impl<const MAX: u8> ClassGrid<MAX> {
    pub fn zeros(width: u32, height: u32) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyMask);
        }
        Ok(Self { width, height, data: vec![0; width as usize * height as usize] })
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyMask);
        }
        if data.len() != width as usize * height as usize {
            return Err(RasterError::BadLength { got: data.len(), width, height });
        }
        if let Some(&value) = data.iter().find(|v| **v > MAX) {
            return Err(RasterError::ValueOutOfRange { value, max: MAX });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Panics if `value > MAX` or the pixel is out of bounds.
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        assert!(value <= MAX, "value {value} exceeds {MAX}");
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = value;
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|v| **v != 0).count()
    }

    /// Any nonzero value becomes 1.
    pub fn binarize(&self) -> BinaryMask {
        ClassGrid { width: self.width, height: self.height, data: self.data.iter().map(|v| u8::from(*v != 0)).collect() }
    }

    /// Same values viewed as a 5-class mask.
    pub fn to_mask(&self) -> Mask {
        ClassGrid { width: self.width, height: self.height, data: self.data.clone() }
    }

    /// Single-channel 8-bit PNG, pixel value = class id.
    pub fn write_png(&self, path: &Path) -> Result<(), RasterError> {
        image::save_buffer_with_format(
            path,
            &self.data,
            self.width,
            self.height,
            image::ExtendedColorType::L8,
            image::ImageFormat::Png,
        )?;
        Ok(())
    }

    pub fn read_png(path: &Path) -> Result<Self, RasterError> {
        let img = image::open(path)?.to_luma8();
        Self::from_vec(img.width(), img.height(), img.into_raw())
    }
}
