use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optim::{DecayMode, HyperParams, OptimizerConfig, OptimizerKind, ScheduleSpec};
use crate::problems::{Activation, LossKind};

/// A complete experiment description, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub optimizer: OptimizerList,
    #[serde(default)]
    pub schedule: ScheduleSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemName {
    Sphere,
    Rosenbrock,
    Quadratic,
    OnlineQuadratic,
    Mlp,
    DoubleWellFlatSharp,
    AsymmetricValley,
    PlateauSlopeBasin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: ProblemName,
    pub dim: Option<usize>,
    #[serde(default)]
    pub params: ProblemParams,
}

/// Problem-specific knobs; each problem reads the keys it needs and ignores the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    /// Initial point (broadcast when it has one entry).
    pub start: Option<Vec<f64>>,
    pub condition_number: Option<f64>,
    /// Online stream: centers drawn from `center ± radius` per coordinate.
    pub center: Option<f64>,
    pub radius: Option<f64>,
    // landscapes
    pub w_flat: Option<f64>,
    pub w_sharp: Option<f64>,
    pub w_left: Option<f64>,
    pub w_right: Option<f64>,
    pub depth: Option<f64>,
    pub plateau_start: Option<f64>,
    pub plateau_grad: Option<f64>,
    pub slope_start: Option<f64>,
    pub ramp_end: Option<f64>,
    pub slope_grad: Option<f64>,
    pub basin_start: Option<f64>,
    pub minimum: Option<f64>,
    /// Basins the escape experiment starts from.
    pub basins: Option<Vec<String>>,
    // gradient noise
    pub tail_index: Option<f64>,
    pub noise_scale: Option<f64>,
    // mlp
    pub widths: Option<Vec<usize>>,
    pub activation: Option<Activation>,
    pub loss: Option<LossKind>,
    pub samples: Option<usize>,
    pub teacher_seed: Option<u64>,
}

/// `[optimizer]` as a single table or `[[optimizer]]` as an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptimizerList {
    One(OptimizerSection),
    Many(Vec<OptimizerSection>),
}

impl OptimizerList {
    pub fn sections(&self) -> &[OptimizerSection] {
        match self {
            OptimizerList::One(s) => std::slice::from_ref(s),
            OptimizerList::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub name: OptimizerKind,
    pub label: Option<String>,
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub weight_decay: Option<f64>,
    pub decay_mode: Option<DecayMode>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default)]
    pub alpha: ScheduleSpec,
    #[serde(default)]
    pub beta1: ScheduleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    pub trials: Option<usize>,
    pub record_every: Option<u64>,
    pub output_dir: Option<String>,
    /// race: loss-gap threshold
    pub threshold: Option<f64>,
    /// assumption / slice: mini-batch size
    pub batch_size: Option<usize>,
    /// assumption: smoothing window and satisfied-fraction level
    pub window: Option<usize>,
    pub fraction_threshold: Option<f64>,
    /// slice: points per axis, half-extent, and flatness radius
    pub grid: Option<usize>,
    pub radius: Option<f64>,
    pub flatness_radius: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.optimizer.sections().is_empty() {
            return Err(Error::Config("at least one [[optimizer]] is required".into()));
        }
        if self.run.steps == 0 {
            return Err(Error::Config("run.steps must be at least 1".into()));
        }
        if self.run.record_every == Some(0) {
            return Err(Error::Config("run.record_every must be at least 1".into()));
        }
        for c in self.optimizers() {
            c.hyper.validate().map_err(|e| Error::Config(format!("optimizer {}: {e}", c.label)))?;
        }
        Ok(())
    }

    /// Optimizer configurations with defaults filled in and schedules attached.
    pub fn optimizers(&self) -> Vec<OptimizerConfig> {
        self.optimizer
            .sections()
            .iter()
            .map(|s| {
                let base = HyperParams::for_kind(s.name);
                let hyper = HyperParams {
                    alpha: s.alpha.unwrap_or(base.alpha),
                    beta1: s.beta1.unwrap_or(base.beta1),
                    beta2: s.beta2.unwrap_or(base.beta2),
                    epsilon: s.epsilon.unwrap_or(base.epsilon),
                    weight_decay: s.weight_decay.unwrap_or(base.weight_decay),
                    decay_mode: s.decay_mode.unwrap_or(base.decay_mode),
                    alpha_schedule: self.schedule.alpha.clone(),
                    beta1_schedule: self.schedule.beta1.clone(),
                };
                let cfg = OptimizerConfig::new(s.name, hyper);
                match &s.label {
                    Some(l) => cfg.with_label(l.clone()),
                    None => cfg,
                }
            })
            .collect()
    }

    /// SHA-256 of the canonical JSON rendering.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
