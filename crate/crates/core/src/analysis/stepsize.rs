use serde::{Deserialize, Serialize};

use super::{run, RecordOptions, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::ParamVector;
use crate::optim::OptimizerConfig;
use crate::problems::{BasinLandscape, LandscapeParams};

/// Share of the run, counted from the end, treated as the converged window.
pub const CONVERGED_TAIL: f64 = 0.25;

/// Mean effective stepsize in the two windows of a plateau → slope → basin run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepsizeTrace {
    pub label: String,
    /// Steps whose iterate lies on the ramp into the steep slope.
    pub ramp_steps: usize,
    pub ramp_mean: f64,
    /// Mean over the final quarter of the run.
    pub converged_mean: f64,
    pub trajectory: Trajectory,
}

/// Runs `config` from `start` on a plateau–slope–basin landscape and
/// averages the effective stepsize over the ramp window and the converged tail.
pub fn stepsize_trace(
    landscape: &BasinLandscape,
    config: &OptimizerConfig,
    start: f64,
    steps: u64,
) -> Result<StepsizeTrace> {
    let LandscapeParams::PlateauSlopeBasin { slope_start, ramp_end, .. } = landscape.params else {
        return Err(Error::Config("stepsize trace needs a plateau_slope_basin landscape".into()));
    };
    let mut problem = landscape.to_problem()?;
    let opts = RecordOptions { every: 1, keep_theta: true };
    let trajectory = run(&mut problem, config, &ParamVector::new(vec![start]), steps, opts)?;
    if let Some(f) = &trajectory.failure {
        return Err(Error::Config(format!("{} aborted at step {}: {}", config.label, f.step, f.reason)));
    }
    let ramp: Vec<f64> = trajectory
        .records
        .iter()
        .filter(|r| {
            let x = r.theta.as_ref().unwrap()[0];
            (slope_start..=ramp_end).contains(&x)
        })
        .map(|r| r.eff_step_mean)
        .collect();
    let tail_len = ((steps as f64 * CONVERGED_TAIL).ceil() as usize).max(1);
    let tail = &trajectory.records[trajectory.records.len() - tail_len..];
    let mean = |v: &mut dyn Iterator<Item = f64>, n: usize| if n == 0 { f64::NAN } else { v.sum::<f64>() / n as f64 };
    Ok(StepsizeTrace {
        label: config.label.clone(),
        ramp_steps: ramp.len(),
        ramp_mean: mean(&mut ramp.iter().copied(), ramp.len()),
        converged_mean: mean(&mut tail.iter().map(|r| r.eff_step_mean), tail.len()),
        trajectory,
    })
}
