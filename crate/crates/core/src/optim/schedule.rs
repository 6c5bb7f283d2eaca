use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a hyperparameter evolves with the step counter `t >= 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Constant,
    /// `base / sqrt(t)`
    InverseSqrt,
    /// `1 - (1 - base) / sqrt(t)`; with base 0 the complement is exactly `1/sqrt(t)`.
    InverseSqrtComplement,
    /// `base * lambda^t`
    ExpDecay { lambda: f64 },
    /// `base * factor^k` where `k` counts milestones `<= t`.
    StepDecay { milestones: Vec<u64>, factor: f64 },
    /// Half-cosine from `base` at `t = 0` down to `floor` at `t = t_max`, flat after.
    Cosine { t_max: u64, floor: f64 },
}

impl ScheduleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScheduleSpec::ExpDecay { lambda } if !(*lambda > 0.0 && *lambda < 1.0) => Err(
                Error::Config(format!("exp_decay lambda must lie in (0, 1), got {lambda}")),
            ),
            ScheduleSpec::StepDecay { milestones, factor } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return Err(Error::Config(format!(
                        "step_decay factor must be positive, got {factor}"
                    )));
                }
                if milestones.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Config("step_decay milestones must be sorted".into()));
                }
                Ok(())
            }
            ScheduleSpec::Cosine { t_max: 0, .. } => {
                Err(Error::Config("cosine t_max must be at least 1".into()))
            }
            ScheduleSpec::Cosine { floor, .. } if !floor.is_finite() => {
                Err(Error::Config("cosine floor must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ScheduleSpec::Constant)
    }
}

/// Value of the schedule at step `t` (1-based) starting from `base`.
pub fn schedule_value(spec: &ScheduleSpec, base: f64, t: u64) -> Result<f64> {
    spec.validate()?;
    if t == 0 {
        return Err(Error::State("schedules are defined for t >= 1"));
    }
    let tf = t as f64;
    Ok(match spec {
        ScheduleSpec::Constant => base,
        ScheduleSpec::InverseSqrt => base / tf.sqrt(),
        ScheduleSpec::InverseSqrtComplement => 1.0 - (1.0 - base) / tf.sqrt(),
        ScheduleSpec::ExpDecay { lambda } => base * lambda.powf(tf),
        ScheduleSpec::StepDecay { milestones, factor } => {
            let passed = milestones.iter().filter(|&&m| m <= t).count();
            base * factor.powi(passed as i32)
        }
        ScheduleSpec::Cosine { t_max, floor } => {
            let progress = (tf / *t_max as f64).min(1.0);
            floor + (base - floor) * 0.5 * (1.0 + (PI * progress).cos())
        }
    })
}
