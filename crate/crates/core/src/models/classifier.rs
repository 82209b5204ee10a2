use serde::{Deserialize, Serialize};

use super::tower::{head_forward, init_head};
use super::{argmax, Bound, ModelError, TowerConfig};
use crate::autodiff::{Graph, ParamStore, Tensor, Var};
use crate::imaging::ImageBuffer;
use crate::labels::DamageClass;
use crate::rng::XorShift64Star;

/// Optional third input concatenated with the two tower outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtraBranch {
    None,
    /// One-hot disaster index of the given length.
    DisasterOneHot(usize),
    /// SSIM between the pre and post crop.
    SsimScalar,
}

impl ExtraBranch {
    pub fn width(self) -> usize {
        match self {
            ExtraBranch::None => 0,
            ExtraBranch::DisasterOneHot(n) => n,
            ExtraBranch::SsimScalar => 1,
        }
    }
}

/// Value fed to the extra branch for one building.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchInput {
    None,
    Disaster(usize),
    Ssim(f64),
}

impl BranchInput {
    fn features(self, branch: ExtraBranch) -> Result<Vec<f64>, ModelError> {
        match (branch, self) {
            (ExtraBranch::None, BranchInput::None) => Ok(vec![]),
            (ExtraBranch::DisasterOneHot(n), BranchInput::Disaster(i)) if i < n => {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                Ok(v)
            }
            (ExtraBranch::SsimScalar, BranchInput::Ssim(s)) if s.is_finite() => Ok(vec![s]),
            (b, x) => Err(ModelError::Input(format!("branch {b:?} cannot take {x:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub tower: TowerConfig,
    pub branch: ExtraBranch,
    /// One tower applied to both crops, or one tower each.
    pub shared_towers: bool,
    pub hidden: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { tower: TowerConfig::default(), branch: ExtraBranch::None, shared_towers: true, hidden: 128 }
    }
}

impl ClassifierConfig {
    fn head_input(&self) -> Result<usize, ModelError> {
        Ok(2 * self.tower.feature_dim()? + self.branch.width())
    }

    fn tower_prefixes(&self) -> (&'static str, &'static str) {
        if self.shared_towers {
            ("tower", "tower")
        } else {
            ("tower_pre", "tower_post")
        }
    }
}

/// One encoded training or inference example.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSample {
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
    pub extra: Vec<f64>,
    pub label: DamageClass,
}

impl ClassifierSample {
    pub fn new(
        config: &ClassifierConfig,
        pre: &ImageBuffer,
        post: &ImageBuffer,
        extra: BranchInput,
        label: DamageClass,
    ) -> Result<Self, ModelError> {
        Ok(Self {
            pre: config.tower.planar_input(pre, "pre patch")?,
            post: config.tower.planar_input(post, "post patch")?,
            extra: extra.features(config.branch)?,
            label,
        })
    }
}

/// Twin-tower damage classifier producing 4 logits (no-damage .. destroyed).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    config: ClassifierConfig,
    params: ParamStore,
}

pub const DAMAGE_CLASSES: usize = 4;

impl ClassifierModel {
    pub fn new(config: ClassifierConfig, seed: u64) -> Result<Self, ModelError> {
        let head_in = config.head_input()?;
        if config.hidden == 0 {
            return Err(ModelError::Config("hidden width must be positive".into()));
        }
        if config.branch == ExtraBranch::DisasterOneHot(0) {
            return Err(ModelError::Config("disaster one-hot needs at least one disaster".into()));
        }
        let mut rng = XorShift64Star::substream(seed, "classifier");
        let mut params = ParamStore::new();
        let (a, b) = config.tower_prefixes();
        config.tower.init(&mut params, a, &mut rng);
        if a != b {
            config.tower.init(&mut params, b, &mut rng);
        }
        init_head(&mut params, "head", head_in, config.hidden, DAMAGE_CLASSES, &mut rng);
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Records the forward pass for `batch` and returns the N×4 logits.
    pub fn forward(&self, g: &mut Graph, p: &Bound, batch: &[&ClassifierSample]) -> Result<Var, ModelError> {
        let s = self.config.tower.input_side;
        let c = self.config.tower.channels;
        let n = batch.len();
        let stack = |f: &dyn Fn(&ClassifierSample) -> &[f64]| batch.iter().flat_map(|x| f(x).iter().copied()).collect();
        let pre = g.input(Tensor::new(vec![n, c, s, s], stack(&|x| &x.pre))?)?;
        let post = g.input(Tensor::new(vec![n, c, s, s], stack(&|x| &x.post))?)?;
        let (ta, tb) = self.config.tower_prefixes();
        let fa = self.config.tower.forward(g, p, ta, pre)?;
        let fb = self.config.tower.forward(g, p, tb, post)?;
        let mut parts = vec![fa, fb];
        let width = self.config.branch.width();
        if width > 0 {
            if batch.iter().any(|x| x.extra.len() != width) {
                return Err(ModelError::Input(format!("extra features must have length {width}")));
            }
            parts.push(g.input(Tensor::new(vec![n, width], stack(&|x| &x.extra))?)?);
        }
        let feats = g.concat(&parts, 1)?;
        head_forward(g, p, "head", feats)
    }

    /// Logits for each sample.
    pub fn predict(&self, batch: &[&ClassifierSample]) -> Result<Vec<[f64; 4]>, ModelError> {
        if batch.is_empty() {
            return Ok(vec![]);
        }
        let mut g = Graph::new();
        let p = Bound::new(&self.params, &mut g)?;
        let out = self.forward(&mut g, &p, batch)?;
        Ok(g.value(out).data().chunks_exact(4).map(|r| [r[0], r[1], r[2], r[3]]).collect())
    }

    /// Logits for one building from its pre and post patches (raw pixel values).
    pub fn classify_building(
        &self,
        pre: &ImageBuffer,
        post: &ImageBuffer,
        extra: BranchInput,
    ) -> Result<[f64; 4], ModelError> {
        let sample = ClassifierSample::new(&self.config, pre, post, extra, DamageClass::NoDamage)?;
        Ok(self.predict(&[&sample])?[0])
    }

    /// Predicted class; ties in the logits go to the lower class.
    pub fn predict_class(&self, pre: &ImageBuffer, post: &ImageBuffer, extra: BranchInput) -> Result<DamageClass, ModelError> {
        let logits = self.classify_building(pre, post, extra)?;
        Ok(DamageClass::from_ordinal(argmax(&logits) as u8).expect("4 logits"))
    }
}
