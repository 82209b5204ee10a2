use serde::{Deserialize, Serialize};

use super::{Bound, ModelError};
use crate::autodiff::{Graph, ParamStore, Tensor, Var};
use crate::imaging::{subtract, ImageBuffer};
use crate::raster::Mask;
use crate::rng::XorShift64Star;

/// Encoder/decoder with one pooling level and a skip connection:
///
/// ```text
/// x ─ conv3 relu ─┬─ pool2 ─ conv3 relu ─ up2 ─┐
///                 └────────────────────────────┴─ concat ─ conv3 relu ─ conv1 → logits
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegNetConfig {
    pub in_channels: usize,
    pub classes: usize,
    /// Channels of the first encoder stage; the second has twice as many.
    pub width: usize,
}

impl SegNetConfig {
    /// 5-class map (background + 4 damage levels) from the post−pre difference.
    pub fn end_to_end() -> Self {
        Self { in_channels: 3, classes: 5, width: 8 }
    }

    /// Building / background from the pre image.
    pub fn footprint() -> Self {
        Self { in_channels: 3, classes: 2, width: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegSample {
    /// C×H×W planar, scaled by 1/255.
    pub input: Vec<f64>,
    /// Class per pixel, row-major.
    pub labels: Vec<usize>,
    pub width: usize,
    pub height: usize,
}

impl SegSample {
    /// `image` in raw pixel units; `labels` one class per pixel.
    pub fn new(config: &SegNetConfig, image: &ImageBuffer, labels: &[u8]) -> Result<Self, ModelError> {
        let (w, h) = (image.width() as usize, image.height() as usize);
        if usize::from(image.channels()) != config.in_channels {
            return Err(ModelError::Input(format!("expected {} channels", config.in_channels)));
        }
        if labels.len() != w * h {
            return Err(ModelError::Input(format!("{} labels for {w}x{h} image", labels.len())));
        }
        if let Some(bad) = labels.iter().find(|l| usize::from(**l) >= config.classes) {
            return Err(ModelError::Input(format!("label {bad} outside {} classes", config.classes)));
        }
        Ok(Self {
            input: image.to_planar().into_iter().map(|v| v / 255.0).collect(),
            labels: labels.iter().map(|l| usize::from(*l)).collect(),
            width: w,
            height: h,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegNet {
    config: SegNetConfig,
    params: ParamStore,
}

impl SegNet {
    pub fn new(config: SegNetConfig, seed: u64) -> Result<Self, ModelError> {
        let SegNetConfig { in_channels: c, classes: k, width: w } = config;
        if c == 0 || k < 2 || w == 0 {
            return Err(ModelError::Config(format!("invalid segmenter config {config:?}")));
        }
        let mut rng = XorShift64Star::substream(seed, "segnet");
        let mut params = ParamStore::new();
        let mut conv = |name: &str, out: usize, inp: usize, ks: usize| {
            let k2 = ks * ks;
            params.add_glorot(format!("{name}.weight"), vec![out, inp, ks, ks], inp * k2, out * k2, &mut rng);
            params.add_zeros(format!("{name}.bias"), vec![out]);
        };
        conv("enc1", w, c, 3);
        conv("enc2", 2 * w, w, 3);
        conv("dec", w, 3 * w, 3);
        conv("out", k, w, 1);
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &SegNetConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// N×classes×H×W logits.
    pub fn forward(&self, g: &mut Graph, p: &Bound, batch: &[&SegSample]) -> Result<Var, ModelError> {
        let first = batch.first().ok_or_else(|| ModelError::Input("empty batch".into()))?;
        let (h, w) = (first.height, first.width);
        if batch.iter().any(|s| s.height != h || s.width != w) {
            return Err(ModelError::Input("batch images differ in size".into()));
        }
        if h % 2 != 0 || w % 2 != 0 || h < 2 || w < 2 {
            return Err(ModelError::Input(format!("segmenter needs even sides, got {w}x{h}")));
        }
        let data: Vec<f64> = batch.iter().flat_map(|s| s.input.iter().copied()).collect();
        let x = g.input(Tensor::new(vec![batch.len(), self.config.in_channels, h, w], data)?)?;
        let conv = |g: &mut Graph, name: &str, x: Var, pad: usize| -> Result<Var, ModelError> {
            Ok(g.conv2d(x, p.var(&format!("{name}.weight")), Some(p.var(&format!("{name}.bias"))), 1, pad)?)
        };
        let e1 = conv(g, "enc1", x, 1)?;
        let e1 = g.relu(e1)?;
        let down = g.maxpool2d(e1, 2, 2)?;
        let e2 = conv(g, "enc2", down, 1)?;
        let e2 = g.relu(e2)?;
        let up = g.upsample_nearest(e2, 2)?;
        let cat = g.concat(&[up, e1], 1)?;
        let d = conv(g, "dec", cat, 1)?;
        let d = g.relu(d)?;
        conv(g, "out", d, 0)
    }

    /// Per-pixel argmax for one raw image; ties go to the lower class.
    pub fn predict(&self, image: &ImageBuffer) -> Result<Vec<u8>, ModelError> {
        let (w, h) = (image.width() as usize, image.height() as usize);
        let sample = SegSample::new(&self.config, image, &vec![0; w * h])?;
        let mut g = Graph::new();
        let p = Bound::new(&self.params, &mut g)?;
        let out = self.forward(&mut g, &p, &[&sample])?;
        let z = g.value(out).data();
        let hw = w * h;
        Ok((0..hw)
            .map(|px| {
                let mut best = 0;
                for c in 1..self.config.classes {
                    if z[c * hw + px] > z[best * hw + px] {
                        best = c;
                    }
                }
                best as u8
            })
            .collect())
    }
}

/// Network input of the end-to-end model: `post - pre` in raw pixel units.
pub fn difference_input(pre: &ImageBuffer, post: &ImageBuffer) -> Result<ImageBuffer, ModelError> {
    Ok(subtract(pre, post)?)
}

/// Damage mask (0 background, 1–4 damage) predicted from a difference image.
pub fn segment_end_to_end(model: &SegNet, diff: &ImageBuffer) -> Result<Mask, ModelError> {
    if model.config.classes != 5 {
        return Err(ModelError::Config(format!("end-to-end model needs 5 classes, has {}", model.config.classes)));
    }
    let classes = model.predict(diff)?;
    Ok(Mask::from_vec(diff.width(), diff.height(), classes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::sgd_step;

    fn image(rng: &mut XorShift64Star, w: u32, h: u32) -> ImageBuffer {
        let n = (w * h * 3) as usize;
        ImageBuffer::from_vec(w, h, 3, (0..n).map(|_| rng.uniform(-255.0, 255.0)).collect()).unwrap()
    }

    #[test]
    fn zero_weights_predict_background() {
        let mut m = SegNet::new(SegNetConfig::end_to_end(), 1).unwrap();
        for p in m.params_mut().iter_mut() {
            p.value.data_mut().fill(0.0);
        }
        let mask = segment_end_to_end(&m, &image(&mut XorShift64Star::new(2), 32, 32)).unwrap();
        assert_eq!(mask.count_nonzero(), 0);
    }

    #[test]
    fn output_matches_input_size() {
        let m = SegNet::new(SegNetConfig::end_to_end(), 1).unwrap();
        let mut rng = XorShift64Star::new(3);
        for _ in 0..6 {
            let w = 2 * rng.range_inclusive(16, 30);
            let h = 2 * rng.range_inclusive(16, 30);
            let mask = segment_end_to_end(&m, &image(&mut rng, w, h)).unwrap();
            assert_eq!((mask.width(), mask.height()), (w, h));
        }
        assert!(segment_end_to_end(&m, &image(&mut rng, 33, 32)).is_err());
        let two = SegNet::new(SegNetConfig::footprint(), 1).unwrap();
        assert!(segment_end_to_end(&two, &image(&mut rng, 32, 32)).is_err());
    }

    fn loss_and_grads(m: &mut SegNet, samples: &[SegSample]) -> f64 {
        let refs: Vec<&SegSample> = samples.iter().collect();
        let labels: Vec<usize> = samples.iter().flat_map(|s| s.labels.iter().copied()).collect();
        let mut g = Graph::new();
        let p = Bound::new(&m.params, &mut g).unwrap();
        let logits = m.forward(&mut g, &p, &refs).unwrap();
        let loss = g.pixel_softmax_cross_entropy(logits, &labels).unwrap();
        g.backward(loss).unwrap();
        let vars = p.vars().to_vec();
        m.params.zero_grad();
        m.params.accumulate_grads(&g, &vars);
        g.value(loss).data()[0]
    }

    fn samples(cfg: &SegNetConfig, rng: &mut XorShift64Star) -> Vec<SegSample> {
        (0..2)
            .map(|_| {
                let img = image(rng, 8, 6);
                let labels: Vec<u8> = (0..48).map(|_| rng.below(cfg.classes as u64) as u8).collect();
                SegSample::new(cfg, &img, &labels).unwrap()
            })
            .collect()
    }

    #[test]
    fn gradients_reach_every_parameter_and_descend() {
        for cfg in [SegNetConfig::end_to_end(), SegNetConfig::footprint()] {
            let mut m = SegNet::new(cfg, 4).unwrap();
            let data = samples(&cfg, &mut XorShift64Star::new(5));
            let mut prev = f64::INFINITY;
            for step in 0..10 {
                let loss = loss_and_grads(&mut m, &data);
                if step == 0 {
                    for p in m.params().iter() {
                        assert!(p.grad.iter().any(|g| *g != 0.0), "{} has zero gradient", p.name);
                    }
                }
                assert!(loss <= prev);
                prev = loss;
                sgd_step(m.params_mut(), 1e-3).unwrap();
            }
        }
    }

    #[test]
    fn bad_samples_rejected() {
        let cfg = SegNetConfig::footprint();
        let img = ImageBuffer::filled(4, 4, 3, 0.0).unwrap();
        assert!(SegSample::new(&cfg, &img, &[0; 15]).is_err());
        assert!(SegSample::new(&cfg, &img, &[2; 16]).is_err());
        let gray = ImageBuffer::filled(4, 4, 1, 0.0).unwrap();
        assert!(SegSample::new(&cfg, &gray, &[0; 16]).is_err());
    }
}
