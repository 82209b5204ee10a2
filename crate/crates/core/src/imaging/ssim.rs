use super::{ImageBuffer, ImagingError};

/// Structural similarity constants. Defaults: `K1=0.01`, `K2=0.03`, `L=255`,
/// 11×11 Gaussian window with σ=1.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub window: usize,
    pub sigma: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self { k1: 0.01, k2: 0.03, dynamic_range: 255.0, window: 11, sigma: 1.5 }
    }
}

impl SsimParams {
    fn validate(&self) -> Result<(), ImagingError> {
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(ImagingError::BadParams("k1 and k2 must be positive"));
        }
        if self.window == 0 || self.sigma <= 0.0 || self.dynamic_range <= 0.0 {
            return Err(ImagingError::BadParams("window, sigma and dynamic range must be positive"));
        }
        Ok(())
    }

    /// Normalized 1-D Gaussian; the 2-D window is its outer product and also sums to 1.
    pub fn kernel_1d(&self) -> Vec<f64> {
        let r = (self.window as f64 - 1.0) / 2.0;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }
}

/// Separable "valid" filtering: output is (w-k+1)×(h-k+1).
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let ow = w - n + 1;
    let oh = h - n + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..n).map(|i| k[i] * horiz[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean SSIM over all full-window positions, computed on luma.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer, params: &SsimParams) -> Result<f64, ImagingError> {
    params.validate()?;
    if (a.width, a.height) != (b.width, b.height) {
        return Err(ImagingError::DimensionMismatch(a.shape(), b.shape()));
    }
    let (w, h) = (a.width as usize, a.height as usize);
    if w < params.window || h < params.window {
        return Err(ImagingError::TooSmallForWindow(a.width, a.height, params.window));
    }
    let x = a.luma().data;
    let y = b.luma().data;
    let k = params.kernel_1d();
    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);

    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let mu_x = filter_valid(&x, w, h, &k);
    let mu_y = filter_valid(&y, w, h, &k);
    let e_xx = filter_valid(&xx, w, h, &k);
    let e_yy = filter_valid(&yy, w, h, &k);
    let e_xy = filter_valid(&xy, w, h, &k);

    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
        let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
        total += num / den;
    }
    Ok(total / mu_x.len() as f64)
}
