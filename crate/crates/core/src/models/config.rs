use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExtraBranch, ModelError};

/// Extra classifier input, as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    #[default]
    None,
    Disaster,
    Ssim,
}

impl BranchKind {
    pub fn to_branch(self, num_disasters: usize) -> ExtraBranch {
        match self {
            BranchKind::None => ExtraBranch::None,
            BranchKind::Disaster => ExtraBranch::DisasterOneHot(num_disasters),
            BranchKind::Ssim => ExtraBranch::SsimScalar,
        }
    }
}

impl std::str::FromStr for BranchKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(BranchKind::None),
            "disaster" => Ok(BranchKind::Disaster),
            "ssim" => Ok(BranchKind::Ssim),
            other => Err(format!("unknown branch {other:?} (none, disaster, ssim)")),
        }
    }
}

/// Training hyperparameters, stored as `config.toml` next to each model.
///
/// ```toml
/// seed = 42
/// lr = 0.0008
/// batch = 32
/// epochs = 10
/// branch = "none"
/// shared_towers = true
/// patch_side = 64
/// disasters = []
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: u64,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub branch: BranchKind,
    pub shared_towers: bool,
    /// Input side of classifier crops, or of resized scenes for the disaster classifier.
    pub patch_side: usize,
    /// Disaster names in one-hot / logit order. Filled in by training.
    pub disasters: Vec<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            lr: 8e-4,
            batch: 32,
            epochs: 10,
            branch: BranchKind::None,
            shared_towers: true,
            patch_side: 64,
            disasters: vec![],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(ModelError::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if self.batch == 0 || self.epochs == 0 {
            return Err(ModelError::Config("batch and epochs must be positive".into()));
        }
        if self.patch_side < 8 {
            return Err(ModelError::Config(format!("patch_side must be >= 8, got {}", self.patch_side)));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ModelError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn read(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| ModelError::Config(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_toml()).map_err(|e| ModelError::io(path, e))
    }
}
