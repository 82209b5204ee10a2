//! Pixel-level image operations: differencing, normalization, resize, SSIM.

mod resize;
mod ssim;

use std::path::Path;

use thiserror::Error;

pub use resize::resize_bilinear;
pub use ssim::{ssim, SsimParams};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("image dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((u32, u32, u8), (u32, u32, u8)),
    #[error("invalid image shape {0}x{1}x{2}")]
    BadShape(u32, u32, u8),
    #[error("buffer length {got} does not match {width}x{height}x{channels}")]
    BadLength { got: usize, width: u32, height: u32, channels: u8 },
    #[error("non-finite pixel value")]
    NonFinite,
    #[error("image {0}x{1} is smaller than the {2}x{2} SSIM window")]
    TooSmallForWindow(u32, u32, usize),
    #[error("invalid SSIM parameters: {0}")]
    BadParams(&'static str),
    #[error("{0}")]
    Codec(#[from] image::ImageError),
}

/// Interleaved (row-major, channel-last) image with float samples, nominally in [0,255].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn filled(width: u32, height: u32, channels: u8, value: f64) -> Result<Self, ImagingError> {
        Self::check_shape(width, height, channels)?;
        let len = width as usize * height as usize * usize::from(channels);
        Self::from_vec(width, height, channels, vec![value; len])
    }

    pub fn from_vec(width: u32, height: u32, channels: u8, data: Vec<f64>) -> Result<Self, ImagingError> {
        Self::check_shape(width, height, channels)?;
        if data.len() != width as usize * height as usize * usize::from(channels) {
            return Err(ImagingError::BadLength { got: data.len(), width, height, channels });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ImagingError::NonFinite);
        }
        Ok(Self { width, height, channels, data })
    }

    fn check_shape(width: u32, height: u32, channels: u8) -> Result<(), ImagingError> {
        if width == 0 || height == 0 || !(channels == 1 || channels == 3) {
            return Err(ImagingError::BadShape(width, height, channels));
        }
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn shape(&self) -> (u32, u32, u8) {
        (self.width, self.height, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn index(&self, x: u32, y: u32, c: u8) -> usize {
        (y as usize * self.width as usize + x as usize) * usize::from(self.channels) + usize::from(c)
    }

    pub fn get(&self, x: u32, y: u32, c: u8) -> f64 {
        self.data[self.index(x, y, c)]
    }

    pub fn set(&mut self, x: u32, y: u32, c: u8, value: f64) {
        let i = self.index(x, y, c);
        self.data[i] = value;
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[f64] {
        let i = self.index(x, y, 0);
        &self.data[i..i + usize::from(self.channels)]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, px: &[f64]) {
        let i = self.index(x, y, 0);
        self.data[i..i + usize::from(self.channels)].copy_from_slice(px);
    }

    /// Rec. 601 luma (`0.299R + 0.587G + 0.114B`); single-channel images pass through.
    pub fn luma(&self) -> ImageBuffer {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect();
        ImageBuffer { width: self.width, height: self.height, channels: 1, data }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Copy of the pixel rectangle `[x0,x1)×[y0,y1)`; bounds must lie inside the image.
    pub fn crop(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> Result<ImageBuffer, ImagingError> {
        if x0 >= x1 || y0 >= y1 || x1 > self.width || y1 > self.height {
            return Err(ImagingError::BadShape(x1.saturating_sub(x0), y1.saturating_sub(y0), self.channels));
        }
        let c = usize::from(self.channels);
        let mut data = Vec::with_capacity((x1 - x0) as usize * (y1 - y0) as usize * c);
        for y in y0..y1 {
            let start = self.index(x0, y, 0);
            data.extend_from_slice(&self.data[start..start + (x1 - x0) as usize * c]);
        }
        Ok(ImageBuffer { width: x1 - x0, height: y1 - y0, channels: self.channels, data })
    }

    /// Planar copy, channel-major: `[c][y][x]`.
    pub fn to_planar(&self) -> Vec<f64> {
        let c = usize::from(self.channels);
        let plane = self.width as usize * self.height as usize;
        let mut out = vec![0.0; self.data.len()];
        for (i, px) in self.data.chunks_exact(c).enumerate() {
            for (k, v) in px.iter().enumerate() {
                out[k * plane + i] = *v;
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageBuffer {
        ImageBuffer { data: self.data.iter().map(|v| f(*v)).collect(), ..self.clone() }
    }

    fn zip_with(&self, other: &ImageBuffer, f: impl Fn(f64, f64) -> f64) -> Result<ImageBuffer, ImagingError> {
        if self.shape() != other.shape() {
            return Err(ImagingError::DimensionMismatch(self.shape(), other.shape()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(ImageBuffer { data, ..self.clone() })
    }

    /// Elementwise sum; the inverse of [`subtract`].
    pub fn add(&self, other: &ImageBuffer) -> Result<ImageBuffer, ImagingError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn read_png(path: &Path) -> Result<ImageBuffer, ImagingError> {
        let img = image::open(path)?;
        let (channels, w, h, raw) = match img.color().channel_count() {
            1 | 2 => {
                let g = img.to_luma8();
                (1, g.width(), g.height(), g.into_raw())
            }
            _ => {
                let rgb = img.to_rgb8();
                (3, rgb.width(), rgb.height(), rgb.into_raw())
            }
        };
        Self::from_vec(w, h, channels, raw.into_iter().map(f64::from).collect())
    }

    /// 8-bit PNG; samples are rounded and clamped to [0,255].
    pub fn write_png(&self, path: &Path) -> Result<(), ImagingError> {
        let bytes: Vec<u8> = self.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
        let color = if self.channels == 1 { image::ExtendedColorType::L8 } else { image::ExtendedColorType::Rgb8 };
        image::save_buffer_with_format(path, &bytes, self.width, self.height, color, image::ImageFormat::Png)?;
        Ok(())
    }
}

/// Signed difference `post - pre`, channel-wise, without clipping.
pub fn subtract(pre: &ImageBuffer, post: &ImageBuffer) -> Result<ImageBuffer, ImagingError> {
    post.zip_with(pre, |b, a| b - a)
}

/// Scales [0,255] samples to [0,1].
pub fn normalize(img: &ImageBuffer) -> ImageBuffer {
    img.map(|v| v / 255.0)
}
