use super::{BinaryMask, Mask, RasterError};
use crate::labels::{DamageLabel, Polygon, SceneLabel};

/// x positions where the horizontal line at `y` crosses any ring edge, unsorted.
///
/// Uses the same half-open crossing rule as [`Polygon::contains`], so a pixel is
/// filled exactly when its center tests inside.
fn crossings(poly: &Polygon, y: f64, out: &mut Vec<f64>) {
    out.clear();
    for ring in poly.rings() {
        let n = ring.len();
        let mut j = n - 1;
        for i in 0..n {
            let (pi, pj) = (ring[i], ring[j]);
            if (pi.y > y) != (pj.y > y) {
                out.push(pj.x + (y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y));
            }
            j = i;
        }
    }
}

fn fill_polygon(mask: &mut Mask, poly: &Polygon, value: u8) {
    let b = poly.bbox();
    let w = mask.width();
    let row_lo = (b.min_y - 0.5).ceil().max(0.0) as u32;
    let row_hi = ((b.max_y - 0.5).ceil().max(0.0) as u32).min(mask.height());
    let mut xs = Vec::new();
    for row in row_lo..row_hi {
        crossings(poly, f64::from(row) + 0.5, &mut xs);
        xs.sort_by(f64::total_cmp);
        // even-odd: center cx is inside iff xs[2k] <= cx < xs[2k+1]
        for pair in xs.chunks_exact(2) {
            let first = (pair[0] - 0.5).ceil().max(0.0);
            let end = (pair[1] - 0.5).ceil().max(0.0).min(f64::from(w));
            let mut col = first as u32;
            while f64::from(col) < end {
                mask.set(col, row, value);
                col += 1;
            }
        }
    }
}

/// Paints polygons by pixel-center sampling with the even-odd rule.
///
/// Classes must be in `1..=4`; when polygons overlap, the later one wins.
pub fn rasterize(buildings: &[(Polygon, u8)], width: u32, height: u32) -> Result<Mask, RasterError> {
    let mut mask = Mask::zeros(width, height)?;
    for (poly, class) in buildings {
        if !(1..=4).contains(class) {
            return Err(RasterError::BadClass(*class));
        }
        fill_polygon(&mut mask, poly, *class);
    }
    Ok(mask)
}

/// Ground-truth raster of a label: damage mask plus the pixels to ignore during scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRaster {
    pub mask: Mask,
    /// Pixels of un-classified buildings; they count toward no metric.
    pub ignore: BinaryMask,
}

/// Rasterizes assessed buildings by damage; un-classified footprints go to the ignore mask.
///
/// Buildings with no subtype at all are painted as building pixels of class 1 so
/// that pre-disaster labels still produce a usable footprint mask.
pub fn rasterize_label(label: &SceneLabel) -> Result<LabelRaster, RasterError> {
    let mut mask = Mask::zeros(label.width, label.height)?;
    let mut ignore = Mask::zeros(label.width, label.height)?;
    for b in &label.buildings {
        match b.label {
            DamageLabel::Assessed(c) => fill_polygon(&mut mask, &b.footprint, c.mask_value()),
            DamageLabel::Unlabeled => fill_polygon(&mut mask, &b.footprint, 1),
            DamageLabel::Unclassified => fill_polygon(&mut ignore, &b.footprint, 1),
        }
    }
    Ok(LabelRaster { mask, ignore: ignore.binarize() })
}
