use serde::{Deserialize, Serialize};

use super::{Bound, ModelError};
use crate::autodiff::{Graph, ParamStore, Var};
use crate::imaging::ImageBuffer;
use crate::rng::XorShift64Star;

/// Convolution followed by relu and 2×2 max pooling. Padding is `kernel / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvBlock {
    pub filters: usize,
    pub kernel: usize,
    pub stride: usize,
}

/// Convolutional feature extractor for square inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerConfig {
    pub input_side: usize,
    pub channels: usize,
    pub blocks: Vec<ConvBlock>,
}

impl Default for TowerConfig {
    fn default() -> Self {
        Self {
            input_side: 64,
            channels: 3,
            blocks: vec![
                ConvBlock { filters: 8, kernel: 3, stride: 1 },
                ConvBlock { filters: 16, kernel: 3, stride: 1 },
            ],
        }
    }
}

impl TowerConfig {
    pub fn with_side(input_side: usize) -> Self {
        Self { input_side, ..Self::default() }
    }

    /// Spatial side after all blocks.
    pub fn output_side(&self) -> Result<usize, ModelError> {
        if self.channels == 0 || self.blocks.is_empty() {
            return Err(ModelError::Config("tower needs channels and at least one block".into()));
        }
        let mut side = self.input_side;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.filters == 0 || b.kernel == 0 || b.stride == 0 {
                return Err(ModelError::Config(format!("block {i}: zero filters, kernel or stride")));
            }
            let padded = side + 2 * (b.kernel / 2);
            if padded < b.kernel {
                return Err(ModelError::Config(format!("block {i}: kernel {} larger than input {side}", b.kernel)));
            }
            side = (padded - b.kernel) / b.stride + 1;
            if side < 2 {
                return Err(ModelError::Config(format!("block {i}: input side {} too small", self.input_side)));
            }
            side /= 2;
        }
        Ok(side)
    }

    /// Length of the flattened feature vector.
    pub fn feature_dim(&self) -> Result<usize, ModelError> {
        let side = self.output_side()?;
        Ok(side * side * self.blocks.last().expect("checked nonempty").filters)
    }

    pub(crate) fn init(&self, store: &mut ParamStore, prefix: &str, rng: &mut XorShift64Star) {
        let mut c = self.channels;
        for (i, b) in self.blocks.iter().enumerate() {
            let k2 = b.kernel * b.kernel;
            store.add_glorot(format!("{prefix}.conv{i}.weight"), vec![b.filters, c, b.kernel, b.kernel], c * k2, b.filters * k2, rng);
            store.add_zeros(format!("{prefix}.conv{i}.bias"), vec![b.filters]);
            c = b.filters;
        }
    }

    /// N×C×S×S → N×feature_dim.
    pub(crate) fn forward(&self, g: &mut Graph, p: &Bound, prefix: &str, x: Var) -> Result<Var, ModelError> {
        let mut h = x;
        for (i, b) in self.blocks.iter().enumerate() {
            let w = p.var(&format!("{prefix}.conv{i}.weight"));
            let bias = p.var(&format!("{prefix}.conv{i}.bias"));
            h = g.conv2d(h, w, Some(bias), b.stride, b.kernel / 2)?;
            h = g.relu(h)?;
            h = g.maxpool2d(h, 2, 2)?;
        }
        Ok(g.flatten(h)?)
    }

    /// Checks a patch against the tower input and returns it as planar `[0, 1]` values.
    pub(crate) fn planar_input(&self, img: &ImageBuffer, what: &str) -> Result<Vec<f64>, ModelError> {
        let side = self.input_side as u32;
        if img.width() != side || img.height() != side || usize::from(img.channels()) != self.channels {
            return Err(ModelError::Input(format!(
                "{what} is {}x{}x{}, expected {side}x{side}x{}",
                img.width(),
                img.height(),
                img.channels(),
                self.channels
            )));
        }
        Ok(img.to_planar().into_iter().map(|v| v / 255.0).collect())
    }
}

/// Two dense layers with a relu between: `in → hidden → out`.
pub(crate) fn init_head(
    store: &mut ParamStore,
    prefix: &str,
    input: usize,
    hidden: usize,
    output: usize,
    rng: &mut XorShift64Star,
) {
    store.add_glorot(format!("{prefix}.fc1.weight"), vec![input, hidden], input, hidden, rng);
    store.add_zeros(format!("{prefix}.fc1.bias"), vec![hidden]);
    store.add_glorot(format!("{prefix}.fc2.weight"), vec![hidden, output], hidden, output, rng);
    store.add_zeros(format!("{prefix}.fc2.bias"), vec![output]);
}

pub(crate) fn head_forward(g: &mut Graph, p: &Bound, prefix: &str, x: Var) -> Result<Var, ModelError> {
    let h = g.linear(x, p.var(&format!("{prefix}.fc1.weight")), p.var(&format!("{prefix}.fc1.bias")))?;
    let h = g.relu(h)?;
    Ok(g.linear(h, p.var(&format!("{prefix}.fc2.weight")), p.var(&format!("{prefix}.fc2.bias")))?)
}
