use super::ImageBuffer;

/// Source sample positions and weights along one axis, half-pixel-center aligned.
fn taps(in_len: u32, out_len: u32) -> Vec<(usize, usize, f64)> {
    let scale = f64::from(in_len) / f64::from(out_len);
    let last = in_len as usize - 1;
    (0..out_len)
        .map(|o| {
            let src = ((f64::from(o) + 0.5) * scale - 0.5).clamp(0.0, last as f64);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(last);
            (lo, hi, src - lo as f64)
        })
        .collect()
}

/// Bilinear resize with half-pixel centers and edge clamping. Same-size resize is a copy.
pub fn resize_bilinear(img: &ImageBuffer, out_w: u32, out_h: u32) -> ImageBuffer {
    assert!(out_w >= 1 && out_h >= 1, "output dimensions must be positive");
    if (out_w, out_h) == (img.width, img.height) {
        return img.clone();
    }
    let xs = taps(img.width, out_w);
    let ys = taps(img.height, out_h);
    let c = usize::from(img.channels);
    let w = img.width as usize;
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize * c);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            for k in 0..c {
                let at = |x: usize, y: usize| img.data[(y * w + x) * c + k];
                let top = at(x0, y0) * (1.0 - tx) + at(x1, y0) * tx;
                let bottom = at(x0, y1) * (1.0 - tx) + at(x1, y1) * tx;
                data.push(top * (1.0 - ty) + bottom * ty);
            }
        }
    }
    ImageBuffer { width: out_w, height: out_h, channels: img.channels, data }
}
