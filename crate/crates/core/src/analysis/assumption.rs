use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derive_stream, ParamVector};
use crate::optim::{OptimizerConfig, OptimizerState};
use crate::problems::MlpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorOptions {
    pub batch_size: usize,
    pub steps: u64,
    /// Trailing window over which per-step fractions are averaged.
    pub window: usize,
    /// Level the smoothed fraction must hold from `T₀` on.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        MonitorOptions {
            batch_size: 128,
            steps: 10_000,
            window: 100,
            threshold: 0.9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionMonitorReport {
    /// Fraction of coordinates with `ζ_t² ≤ β₁ m_{t−1}² / (2 − β₁)` at step `t` (index `t − 1`).
    pub fractions: Vec<f64>,
    /// Trailing-window mean; entry `k` covers steps `k + 1 ..= k + window`.
    pub smoothed: Vec<f64>,
    /// First step from which the smoothed fraction stays at or above the threshold.
    pub t0: Option<u64>,
    /// Full-batch loss at `θ_{t−1}`.
    pub losses: Vec<f64>,
    /// Batch covers the whole dataset, so `ζ_t ≡ 0`.
    pub degenerate: bool,
    pub window: usize,
    pub threshold: f64,
}

/// `T₀` from a per-step series: the step after the last window that fell
/// below `threshold`, or `None` if the final window is below it.
fn sustained_from(smoothed: &[f64], window: usize, threshold: f64) -> Option<u64> {
    match smoothed.iter().rposition(|&s| s < threshold) {
        None if smoothed.is_empty() => None,
        None => Some(window as u64),
        Some(k) if k + 1 == smoothed.len() => None,
        Some(k) => Some((k + window + 1) as u64),
    }
}

/// Trains the network with mini-batch gradients and, before each step,
/// compares the mini-batch noise `ζ_t = g_t − ∇f(θ_{t−1})` against the
/// optimizer's momentum `m_{t−1}` coordinate-wise.
pub fn assumption_monitor(
    problem: &MlpProblem,
    config: &OptimizerConfig,
    theta0: &ParamVector,
    opts: MonitorOptions,
) -> Result<AssumptionMonitorReport> {
    let n = problem.data.len();
    if opts.batch_size == 0 || opts.steps == 0 || opts.window == 0 {
        return Err(Error::Config("batch_size, steps and window must be positive".into()));
    }
    if !(0.0..=1.0).contains(&opts.threshold) {
        return Err(Error::Config(format!("threshold must lie in [0, 1], got {}", opts.threshold)));
    }
    config.hyper.validate()?;
    theta0.check_len(problem.dim(), "theta0")?;
    let degenerate = opts.batch_size >= n;

    let mut rng = derive_stream(opts.seed, 0);
    let mut state = OptimizerState::new(config.kind.kernel(), problem.dim());
    let mut theta = theta0.clone();
    let mut fractions = Vec::with_capacity(opts.steps as usize);
    let mut losses = Vec::with_capacity(opts.steps as usize);
    for t in 1..=opts.steps {
        let (loss, full) = problem.loss_and_grad(&theta, None)?;
        let g = if degenerate {
            full.clone()
        } else {
            let rows = rng.sample_without_replacement(n, opts.batch_size);
            problem.loss_and_grad(&theta, Some(&rows))?.1
        };
        let b1 = config.hyper.beta1_at(t)?;
        let c = b1 / (2.0 - b1);
        let ok = g
            .iter()
            .zip(full.iter())
            .zip(state.m().iter())
            .filter(|((g, f), m)| (*g - *f).powi(2) <= c * *m * *m)
            .count();
        fractions.push(ok as f64 / g.len() as f64);
        losses.push(loss);
        state.step(&mut theta, &g, &config.hyper)?;
    }

    let w = opts.window.min(fractions.len());
    let mut smoothed = Vec::with_capacity(fractions.len() + 1 - w);
    let mut acc: f64 = fractions[..w].iter().sum();
    smoothed.push(acc / w as f64);
    for k in w..fractions.len() {
        acc += fractions[k] - fractions[k - w];
        smoothed.push(acc / w as f64);
    }
    Ok(AssumptionMonitorReport {
        t0: sustained_from(&smoothed, w, opts.threshold),
        fractions,
        smoothed,
        losses,
        degenerate,
        window: w,
        threshold: opts.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;
    use crate::optim::{HyperParams, OptimizerKind};
    use crate::problems::{init_weights, teacher_dataset, Activation, LossKind, MlpSpec};

    fn small() -> (MlpProblem, ParamVector) {
        let spec = MlpSpec::new(vec![3, 6, 2], Activation::Tanh, LossKind::Mse).unwrap();
        let data = teacher_dataset(&spec, 40, &mut derive_stream(1, 0)).unwrap();
        let w = init_weights(&spec, &mut derive_stream(2, 0));
        (MlpProblem::new(spec, data).unwrap(), w)
    }

    #[test]
    fn full_batch_is_degenerate_and_always_satisfied() {
        let (p, w) = small();
        let cfg = OptimizerConfig::defaults(OptimizerKind::Adamomentum);
        let opts = MonitorOptions { batch_size: 40, steps: 50, window: 10, ..Default::default() };
        let r = assumption_monitor(&p, &cfg, &w, opts).unwrap();
        assert!(r.degenerate);
        assert!(r.fractions.iter().all(|&f| f == 1.0));
        assert_eq!(r.t0, Some(10));
    }

    #[test]
    fn zero_beta1_reduces_to_exact_zero_noise() {
        let (p, w) = small();
        let hp = HyperParams { beta1: 0.0, ..HyperParams::default() };
        let cfg = OptimizerConfig::new(OptimizerKind::Adamomentum, hp);
        let opts = MonitorOptions { batch_size: 8, steps: 30, window: 5, ..Default::default() };
        let r = assumption_monitor(&p, &cfg, &w, opts).unwrap();
        assert!(r.fractions.iter().all(|&f| f < 0.05), "{:?}", r.fractions);
        assert!(r.fractions.iter().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn sustained_level() {
        assert_eq!(sustained_from(&[0.5, 0.95, 0.99], 10, 0.9), Some(11));
        assert_eq!(sustained_from(&[0.95, 0.5], 10, 0.9), None);
        assert_eq!(sustained_from(&[0.95, 0.96], 10, 0.9), Some(10));
    }
}
