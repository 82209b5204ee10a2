use serde::{Deserialize, Serialize};

use super::tower::{head_forward, init_head};
use super::{argmax, Bound, ModelError, TowerConfig};
use crate::autodiff::{Graph, ParamStore, Tensor, Var};
use crate::imaging::{resize_bilinear, ImageBuffer};
use crate::rng::XorShift64Star;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisasterConfig {
    /// `channels` must be 6: pre and post stacked.
    pub tower: TowerConfig,
    pub num_disasters: usize,
    pub hidden: usize,
}

impl DisasterConfig {
    pub fn new(input_side: usize, num_disasters: usize) -> Self {
        Self { tower: TowerConfig { channels: 6, ..TowerConfig::with_side(input_side) }, num_disasters, hidden: 128 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisasterSample {
    /// 6×S×S planar, `[0, 1]`.
    pub input: Vec<f64>,
    pub label: usize,
}

impl DisasterSample {
    /// Resizes both scene images to the model side and stacks them.
    pub fn new(config: &DisasterConfig, pre: &ImageBuffer, post: &ImageBuffer, label: usize) -> Result<Self, ModelError> {
        if pre.shape() != post.shape() {
            return Err(ModelError::Input(format!("pre {:?} and post {:?} differ", pre.shape(), post.shape())));
        }
        if pre.channels() != 3 {
            return Err(ModelError::Input("disaster classifier needs RGB images".into()));
        }
        let side = config.tower.input_side as u32;
        let mut input = resize_bilinear(pre, side, side).to_planar();
        input.extend(resize_bilinear(post, side, side).to_planar());
        input.iter_mut().for_each(|v| *v /= 255.0);
        Ok(Self { input, label })
    }
}

/// Scene-level classifier predicting which disaster an image pair shows.
#[derive(Debug, Clone, PartialEq)]
pub struct DisasterClassifier {
    config: DisasterConfig,
    params: ParamStore,
}

impl DisasterClassifier {
    pub fn new(config: DisasterConfig, seed: u64) -> Result<Self, ModelError> {
        if config.tower.channels != 6 {
            return Err(ModelError::Config("disaster tower takes 6 channels".into()));
        }
        if config.num_disasters == 0 || config.hidden == 0 {
            return Err(ModelError::Config("need at least one disaster and a positive hidden width".into()));
        }
        let dim = config.tower.feature_dim()?;
        let mut rng = XorShift64Star::substream(seed, "disaster");
        let mut params = ParamStore::new();
        config.tower.init(&mut params, "tower", &mut rng);
        init_head(&mut params, "head", dim, config.hidden, config.num_disasters, &mut rng);
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &DisasterConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn forward(&self, g: &mut Graph, p: &Bound, batch: &[&DisasterSample]) -> Result<Var, ModelError> {
        let s = self.config.tower.input_side;
        let data: Vec<f64> = batch.iter().flat_map(|x| x.input.iter().copied()).collect();
        let x = g.input(Tensor::new(vec![batch.len(), 6, s, s], data)?)?;
        let f = self.config.tower.forward(g, p, "tower", x)?;
        head_forward(g, p, "head", f)
    }

    pub fn predict(&self, batch: &[&DisasterSample]) -> Result<Vec<Vec<f64>>, ModelError> {
        if batch.is_empty() {
            return Ok(vec![]);
        }
        let mut g = Graph::new();
        let p = Bound::new(&self.params, &mut g)?;
        let out = self.forward(&mut g, &p, batch)?;
        Ok(g.value(out).data().chunks_exact(self.config.num_disasters).map(<[f64]>::to_vec).collect())
    }

    /// One logit per disaster for a scene pair (any size; resized internally).
    pub fn classify_disaster(&self, pre: &ImageBuffer, post: &ImageBuffer) -> Result<Vec<f64>, ModelError> {
        let sample = DisasterSample::new(&self.config, pre, post, 0)?;
        Ok(self.predict(&[&sample])?.remove(0))
    }

    pub fn predict_index(&self, pre: &ImageBuffer, post: &ImageBuffer) -> Result<usize, ModelError> {
        Ok(argmax(&self.classify_disaster(pre, post)?))
    }
}
