use super::RasterError;
use crate::imaging::{resize_bilinear, ImageBuffer};
use crate::labels::Polygon;

/// How a building is cut out of a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropSpec {
    /// Margin added on every side, as a fraction of the longer bbox side (rounded up).
    pub padding_fraction: f64,
    pub output_side: u32,
}

impl Default for CropSpec {
    fn default() -> Self {
        Self { padding_fraction: 0.1, output_side: 64 }
    }
}

impl CropSpec {
    pub fn new(padding_fraction: f64, output_side: u32) -> Result<Self, RasterError> {
        let spec = Self { padding_fraction, output_side };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), RasterError> {
        if !(self.padding_fraction >= 0.0 && self.padding_fraction.is_finite()) {
            return Err(RasterError::BadCropSpec("padding_fraction must be finite and >= 0"));
        }
        if self.output_side < 8 {
            return Err(RasterError::BadCropSpec("output_side must be >= 8"));
        }
        Ok(())
    }
}

/// Pixel rectangle `[x0,x1)×[y0,y1)` a crop reads from, before resizing.
pub fn crop_region(
    footprint: &Polygon,
    padding_fraction: f64,
    width: u32,
    height: u32,
) -> Result<(u32, u32, u32, u32), RasterError> {
    let b = footprint.bbox();
    if b.width() <= 0.0 || b.height() <= 0.0 {
        return Err(RasterError::ZeroAreaBox);
    }
    let pad = (padding_fraction * b.width().max(b.height())).ceil();
    let x0 = (b.min_x.floor() - pad).clamp(0.0, f64::from(width));
    let y0 = (b.min_y.floor() - pad).clamp(0.0, f64::from(height));
    let x1 = (b.max_x.ceil() + pad).clamp(0.0, f64::from(width));
    let y1 = (b.max_y.ceil() + pad).clamp(0.0, f64::from(height));
    if x1 <= x0 || y1 <= y0 {
        return Err(RasterError::ZeroAreaBox);
    }
    Ok((x0 as u32, y0 as u32, x1 as u32, y1 as u32))
}

/// Padded bounding-box crop, bilinearly resized to `output_side`².
pub fn crop_building(image: &ImageBuffer, footprint: &Polygon, spec: &CropSpec) -> Result<ImageBuffer, RasterError> {
    spec.validate()?;
    let (x0, y0, x1, y1) = crop_region(footprint, spec.padding_fraction, image.width(), image.height())?;
    let region = image.crop(x0, y0, x1, y1)?;
    Ok(resize_bilinear(&region, spec.output_side, spec.output_side))
}
