use serde::{Deserialize, Serialize};

use super::{schedule_value, OptimizerKind, ScheduleSpec};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.001;
pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    #[default]
    None,
    /// `wd * theta` is added to the gradient before the moments see it.
    Coupled,
    /// `alpha_t * wd * theta` is subtracted from the parameters after the step.
    Decoupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub decay_mode: DecayMode,
    pub alpha_schedule: ScheduleSpec,
    pub beta1_schedule: ScheduleSpec,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha: DEFAULT_ALPHA,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
            weight_decay: 0.0,
            decay_mode: DecayMode::None,
            alpha_schedule: ScheduleSpec::Constant,
            beta1_schedule: ScheduleSpec::Constant,
        }
    }
}

impl HyperParams {
    /// Defaults adjusted to the textbook form of each optimizer.
    pub fn for_kind(kind: OptimizerKind) -> Self {
        let base = HyperParams::default();
        match kind {
            // m_t = g_t
            OptimizerKind::Rmsprop => HyperParams { beta1: 0.0, ..base },
            // m_t = g_t, v_t = g_t^2
            OptimizerKind::Rprop => HyperParams {
                beta1: 0.0,
                beta2: 0.0,
                ..base
            },
            OptimizerKind::Adamw => HyperParams {
                decay_mode: DecayMode::Decoupled,
                ..base
            },
            _ => base,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_schedules(mut self, alpha: ScheduleSpec, beta1: ScheduleSpec) -> Self {
        self.alpha_schedule = alpha;
        self.beta1_schedule = beta1;
        self
    }

    /// Checks ranges. `epsilon = 0` is accepted so the damping-free form of
    /// the update can be studied; it is the caller's job to keep `v` nonzero.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be > 0, got {}", self.alpha)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        self.alpha_schedule.validate()?;
        self.beta1_schedule.validate()?;
        Ok(())
    }

    pub fn alpha_at(&self, t: u64) -> Result<f64> {
        schedule_value(&self.alpha_schedule, self.alpha, t)
    }

    pub fn beta1_at(&self, t: u64) -> Result<f64> {
        let b = schedule_value(&self.beta1_schedule, self.beta1, t)?;
        if !(0.0..1.0).contains(&b) {
            return Err(Error::Config(format!(
                "beta1 schedule left [0, 1) at step {t}: {b}"
            )));
        }
        Ok(b)
    }
}

/// A named optimizer instance: kernel choice plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub label: String,
    pub kind: OptimizerKind,
    pub hyper: HyperParams,
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind, hyper: HyperParams) -> Self {
        let label = format!("{}_{}", kind.name(), hyper.alpha);
        OptimizerConfig { label, kind, hyper }
    }

    pub fn defaults(kind: OptimizerKind) -> Self {
        Self::new(kind, HyperParams::for_kind(kind))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}
