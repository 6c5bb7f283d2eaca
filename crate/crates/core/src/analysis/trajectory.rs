use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ParamVector;
use crate::optim::{effective_stepsize, OptimizerConfig, OptimizerState};
use crate::problems::{noisy_grad, NoisyProblem, Problem};

/// Source of the gradient fed to the optimizer. Losses and recorded gradient
/// norms always come from the underlying deterministic problem.
pub trait GradientOracle {
    fn problem(&self) -> &Problem;
    fn sample_grad(&mut self, theta: &ParamVector) -> Result<ParamVector>;
}

impl GradientOracle for Problem {
    fn problem(&self) -> &Problem {
        self
    }

    fn sample_grad(&mut self, theta: &ParamVector) -> Result<ParamVector> {
        self.grad(theta)
    }
}

impl GradientOracle for NoisyProblem {
    fn problem(&self) -> &Problem {
        &self.base
    }

    fn sample_grad(&mut self, theta: &ParamVector) -> Result<ParamVector> {
        noisy_grad(self, theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordOptions {
    /// Record every n-th step (the final step is always recorded).
    pub every: u64,
    pub keep_theta: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        RecordOptions {
            every: 1,
            keep_theta: false,
        }
    }
}

/// Measurements taken right after step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub theta: Option<ParamVector>,
    pub loss: f64,
    pub grad_sq_norm: f64,
    pub eff_step_min: f64,
    pub eff_step_mean: f64,
    pub eff_step_max: f64,
    pub alpha_t: f64,
    pub beta1_t: f64,
}

/// Why a run stopped before its budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub step: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub label: String,
    pub theta0: ParamVector,
    pub records: Vec<StepRecord>,
    pub final_theta: ParamVector,
    /// Set when the run aborted; `records` then hold everything before the failing step.
    pub failure: Option<RunFailure>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }
}

/// Runs `steps` optimizer updates from `theta0`.
///
/// Configuration errors are returned as `Err`. A non-finite loss, gradient
/// or update stops the run and is reported in [`Trajectory::failure`].
pub fn run<O: GradientOracle + ?Sized>(
    oracle: &mut O,
    config: &OptimizerConfig,
    theta0: &ParamVector,
    steps: u64,
    opts: RecordOptions,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if opts.every == 0 {
        return Err(Error::Config("record_every must be at least 1".into()));
    }
    config.hyper.validate()?;
    let dim = oracle.problem().dim();
    theta0.check_len(dim, "theta0")?;

    let mut state = OptimizerState::new(config.kind.kernel(), dim);
    let mut theta = theta0.clone();
    let mut records = Vec::with_capacity((steps / opts.every) as usize + 1);
    let mut failure = None;
    for t in 1..=steps {
        let outcome = (|| -> Result<Option<StepRecord>> {
            let g = oracle.sample_grad(&theta)?;
            state.step(&mut theta, &g, &config.hyper)?;
            if t % opts.every != 0 && t != steps {
                return Ok(None);
            }
            let problem = oracle.problem();
            let loss = problem.eval(&theta)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    context: "loss",
                    index: None,
                });
            }
            let (lo, mean, hi) = effective_stepsize(&state, &config.hyper)?.summary();
            Ok(Some(StepRecord {
                t,
                theta: opts.keep_theta.then(|| theta.clone()),
                loss,
                grad_sq_norm: problem.grad(&theta)?.norm_sq(),
                eff_step_min: lo,
                eff_step_mean: mean,
                eff_step_max: hi,
                alpha_t: state.last_alpha().unwrap_or(f64::NAN),
                beta1_t: state.last_beta1().unwrap_or(f64::NAN),
            }))
        })();
        match outcome {
            Ok(Some(r)) => records.push(r),
            Ok(None) => {}
            Err(e @ (Error::NonFinite { .. } | Error::Domain(_))) => {
                failure = Some(RunFailure {
                    step: t,
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Trajectory {
        label: config.label.clone(),
        theta0: theta0.clone(),
        records,
        final_theta: theta,
        failure,
    })
}

/// One optimizer's line in a race table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceRow {
    pub label: String,
    /// First `t` with `f(θ_t) − f(θ*) ≤ threshold`; `None` when censored.
    pub steps_to_threshold: Option<u64>,
    pub final_gap: f64,
    pub initial_dist: f64,
    /// `max_t ‖θ_t − θ*‖` over the run.
    pub max_dist: f64,
}

impl RaceRow {
    pub fn overshoots(&self) -> bool {
        self.max_dist > self.initial_dist
    }
}

/// Races several optimizers on a problem with a known optimum.
///
/// A start already within `threshold` reports step 1.
pub fn race(
    problem: &Problem,
    configs: &[OptimizerConfig],
    theta0: &ParamVector,
    steps: u64,
    threshold: f64,
) -> Result<Vec<RaceRow>> {
    let Some(opt) = problem.optimum() else {
        return Err(Error::Config(format!("race needs a known optimum; {} has none", problem.name())));
    };
    if !(threshold > 0.0) {
        return Err(Error::Config(format!("threshold must be > 0, got {threshold}")));
    }
    let initial_gap = problem.eval(theta0)? - opt.value;
    configs
        .iter()
        .map(|cfg| {
            let traj = run(&mut problem.clone(), cfg, theta0, steps, RecordOptions { every: 1, keep_theta: true })?;
            if let Some(f) = &traj.failure {
                return Err(Error::Config(format!("{} aborted at step {}: {}", cfg.label, f.step, f.reason)));
            }
            let hit = if initial_gap <= threshold {
                Some(1)
            } else {
                traj.records.iter().find(|r| r.loss - opt.value <= threshold).map(|r| r.t)
            };
            let dist = |x: &ParamVector| x.sub(&opt.point).norm();
            let max_dist = traj
                .records
                .iter()
                .map(|r| dist(r.theta.as_ref().unwrap()))
                .fold(0.0, f64::max);
            Ok(RaceRow {
                label: cfg.label.clone(),
                steps_to_threshold: hit,
                final_gap: traj.records.last().unwrap().loss - opt.value,
                initial_dist: dist(theta0),
                max_dist,
            })
        })
        .collect()
}
