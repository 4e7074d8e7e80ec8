use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::HarnessError;
use crate::edrnet::EdrConfig;
use crate::losses::LossWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "SEL")]
    Sel,
    #[serde(rename = "WSEL")]
    Wsel,
}

/// Adaptive moment estimation with L2 weight decay added to the gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    #[serde(rename = "optimizer")]
    pub name: String,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    #[serde(rename = "adam_eps")]
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            name: "adam".into(),
            lr: 7e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// Step decay: the learning rate is multiplied by `factor` every `every`
/// epochs. `every = 0` disables it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrDecay {
    #[serde(rename = "lr_decay_every")]
    pub every: usize,
    #[serde(rename = "lr_decay_factor")]
    pub factor: f64,
}

impl Default for LrDecay {
    fn default() -> Self {
        LrDecay { every: 80, factor: 0.5 }
    }
}

impl LrDecay {
    pub fn lr_at(&self, base: f64, epoch: usize) -> f64 {
        if self.every == 0 {
            return base;
        }
        base * self.factor.powi((epoch / self.every) as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    #[serde(rename = "augment")]
    pub enabled: bool,
    #[serde(rename = "augment_per_class")]
    pub per_class: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            enabled: false,
            per_class: 250,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct B2ilcConfig {
    #[serde(rename = "b2ilc")]
    pub enabled: bool,
    #[serde(rename = "b2ilc_wr")]
    pub wr: f64,
}

impl Default for B2ilcConfig {
    fn default() -> Self {
        B2ilcConfig {
            enabled: false,
            wr: crate::b2ilc::DEFAULT_WR_THRESHOLD,
        }
    }
}

impl B2ilcConfig {
    pub fn threshold(&self) -> Option<f64> {
        self.enabled.then_some(self.wr)
    }
}

/// Optimization settings. Serialized flat, next to the model keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub task: Task,
    #[serde(flatten)]
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(flatten)]
    pub lr_decay: LrDecay,
    #[serde(flatten)]
    pub loss: LossWeights,
    #[serde(flatten)]
    pub augment: AugmentConfig,
    #[serde(flatten)]
    pub b2ilc: B2ilcConfig,
    /// Seeds shuffling and augmentation.
    pub seed: u64,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            task: Task::Sel,
            optimizer: OptimizerConfig::default(),
            batch_size: 64,
            epochs: 300,
            lr_decay: LrDecay::default(),
            loss: LossWeights::default(),
            augment: AugmentConfig::default(),
            b2ilc: B2ilcConfig::default(),
            seed: 0,
            patience: 30,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let o = &self.optimizer;
        if o.name != "adam" {
            return bad(format!("unsupported optimizer {:?}, expected \"adam\"", o.name));
        }
        if !(o.lr.is_finite() && o.lr >= 0.0) {
            return bad(format!("lr must be finite and non-negative, got {}", o.lr));
        }
        if !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) {
            return bad(format!("betas must lie in [0, 1), got ({}, {})", o.beta1, o.beta2));
        }
        if o.eps.is_nan() || o.eps <= 0.0 || o.weight_decay.is_nan() || o.weight_decay < 0.0 {
            return bad("adam_eps must be positive and weight_decay non-negative".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.lr_decay.factor > 0.0 && self.lr_decay.factor.is_finite()) {
            return bad(format!(
                "lr_decay_factor must be positive, got {}",
                self.lr_decay.factor
            ));
        }
        if !self.loss.is_valid() {
            return bad(format!("loss weights must be finite and non-negative: {:?}", self.loss));
        }
        if !(0.0..=1.0).contains(&self.b2ilc.wr) {
            return bad(format!("b2ilc_wr must lie in [0, 1], got {}", self.b2ilc.wr));
        }
        if self.task == Task::Wsel && self.augment.enabled {
            return bad("augmentation needs segment labels and is unavailable for WSEL".into());
        }
        Ok(())
    }
}

/// Model and training settings read from one flat JSON object. `seed` is
/// shared: it drives initialisation, shuffling and augmentation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub model: EdrConfig,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn known_keys() -> BTreeSet<String> {
        let mut keys = BTreeSet::new();
        for v in [
            serde_json::to_value(EdrConfig::default()).expect("serializable"),
            serde_json::to_value(TrainConfig::default()).expect("serializable"),
        ] {
            if let Value::Object(m) = v {
                keys.extend(m.into_iter().map(|(k, _)| k));
            }
        }
        keys
    }

    pub fn from_value(value: Value) -> Result<Self, HarnessError> {
        let Value::Object(map) = value else {
            return Err(HarnessError::Config("config must be a JSON object".into()));
        };
        let known = Self::known_keys();
        let unknown: Vec<&str> = map.keys().map(String::as_str).filter(|k| !known.contains(*k)).collect();
        if !unknown.is_empty() {
            return Err(HarnessError::Config(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            )));
        }
        let model: EdrConfig = serde_json::from_value(Value::Object(map.clone()))
            .map_err(|e| HarnessError::Config(format!("model settings: {e}")))?;
        let train: TrainConfig = serde_json::from_value(Value::Object(map))
            .map_err(|e| HarnessError::Config(format!("training settings: {e}")))?;
        let mut cfg = RunConfig { model, train };
        cfg.set_seed(cfg.train.seed);
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let value: Value = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        for v in [
            serde_json::to_value(&self.model).expect("serializable"),
            serde_json::to_value(&self.train).expect("serializable"),
        ] {
            if let Value::Object(m) = v {
                map.extend(m);
            }
        }
        Value::Object(map)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("serializable")
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.model.seed = seed;
        self.train.seed = seed;
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.model.validate()?;
        self.train.validate()
    }
}
