use super::{connected_components, trace_boundary, Mask};
use crate::labels::Polygon;

/// Most frequent nonzero class among `values`; ties go to the higher class. `None` if all zero.
pub fn majority_class(values: impl IntoIterator<Item = u8>) -> Option<u8> {
    let mut counts = [0usize; 5];
    for v in values {
        counts[usize::from(v.min(4))] += 1;
    }
    // max_by_key keeps the last of equal maxima, so ascending order favours higher damage
    (1..=4u8)
        .filter(|c| counts[usize::from(*c)] > 0)
        .max_by_key(|c| counts[usize::from(*c)])
}

/// Vectorizes a class mask: one outline per 8-connected building region of at
/// least `min_area` pixels, labelled with the region's majority class.
pub fn polygonize(mask: &Mask, min_area: usize) -> Vec<(Polygon, u8)> {
    connected_components(&mask.binarize())
        .into_iter()
        .filter(|c| c.pixels.len() >= min_area)
        .map(|c| {
            let class = majority_class(c.pixels.iter().map(|&(x, y)| mask.get(x, y)))
                .expect("component pixels are foreground");
            (trace_boundary(&c.pixels), class)
        })
        .collect()
}
