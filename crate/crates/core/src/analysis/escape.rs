use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derive_stream, standard_sas, ParamVector, StableNoiseSpec};
use crate::optim::{OptimizerConfig, OptimizerState};
use crate::problems::{BasinLandscape, LandscapeKind};

/// Smallest trial count accepted by [`escape_harness`].
pub const MIN_TRIALS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeTrialReport {
    pub landscape: LandscapeKind,
    pub basin: String,
    pub optimizer: String,
    pub noise: StableNoiseSpec,
    pub master_seed: u64,
    pub trial: u64,
    /// First step outside the basin's escape interval; `None` if censored at the budget.
    pub gamma: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeStats {
    pub optimizer: String,
    pub trials: usize,
    pub censored: usize,
    /// Mean of Γ with censored trials counted as `budget + 1`.
    pub mean_gamma: f64,
    pub median_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub basin: String,
    pub budget: u64,
    /// Trial-major: all optimizers for trial 0, then trial 1, ...
    pub trials: Vec<EscapeTrialReport>,
    pub stats: Vec<EscapeStats>,
}

/// One-sided exact sign test of "first sample tends to be larger".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub greater: usize,
    pub less: usize,
    pub ties: usize,
    pub p_value: f64,
}

/// Exact one-sided sign test on paired samples; ties are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    let (mut greater, mut less, mut ties) = (0, 0, 0);
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Greater) => greater += 1,
            Some(std::cmp::Ordering::Less) => less += 1,
            _ => ties += 1,
        }
    }
    let n = greater + less;
    // P(X >= greater), X ~ Binomial(n, 1/2), summed in log space
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let p_value = (greater..=n)
        .map(|k| (ln_fact[n] - ln_fact[k] - ln_fact[n - k] - n as f64 * std::f64::consts::LN_2).exp())
        .sum::<f64>()
        .min(1.0);
    SignTest {
        greater,
        less,
        ties,
        p_value,
    }
}

impl EscapeReport {
    /// Γ values for one optimizer in trial order, censored as `budget + 1`.
    pub fn gammas(&self, optimizer: &str) -> Vec<f64> {
        self.trials
            .iter()
            .filter(|t| t.optimizer == optimizer)
            .map(|t| t.gamma.unwrap_or(self.budget + 1) as f64)
            .collect()
    }

    pub fn stats_for(&self, optimizer: &str) -> Option<&EscapeStats> {
        self.stats.iter().find(|s| s.optimizer == optimizer)
    }

    /// Paired sign test of Γ(a) > Γ(b).
    pub fn compare(&self, a: &str, b: &str) -> SignTest {
        sign_test(&self.gammas(a), &self.gammas(b))
    }
}

#[allow(clippy::too_many_arguments)]
fn first_exit(
    landscape: &BasinLandscape,
    center: f64,
    escaped: impl Fn(f64) -> bool,
    config: &OptimizerConfig,
    noise: &StableNoiseSpec,
    master_seed: u64,
    trial: u64,
    budget: u64,
) -> Result<Option<u64>> {
    let mut rng = derive_stream(master_seed, trial);
    let mut state = OptimizerState::new(config.kind.kernel(), 1);
    let mut x = ParamVector::new(vec![center]);
    let scale = noise.scale_at(0);
    let mut g = ParamVector::zeros(1);
    for t in 1..=budget {
        let zeta = if scale == 0.0 { 0.0 } else { scale * standard_sas(noise.tail_index, &mut rng) };
        g[0] = landscape.slope(x[0]) + zeta;
        state.step(&mut x, &g, &config.hyper)?;
        if escaped(x[0]) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Monte-Carlo first-exit times from the named basin of a 1-D landscape.
///
/// Trial `i` uses stream `(master_seed, i)` for every optimizer, so the
/// optimizers see identical noise sequences trial by trial.
pub fn escape_harness(
    landscape: &BasinLandscape,
    basin: &str,
    configs: &[OptimizerConfig],
    noise: &StableNoiseSpec,
    trials: usize,
    budget: u64,
    master_seed: u64,
) -> Result<EscapeReport> {
    if budget < 1 {
        return Err(Error::Config("escape budget must be at least 1".into()));
    }
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("escape harness needs >= {MIN_TRIALS} trials, got {trials}")));
    }
    noise.validate()?;
    if noise.scale.len() != 1 {
        return Err(Error::shape("escape noise scale", 1, noise.scale.len()));
    }
    for c in configs {
        c.hyper.validate()?;
    }
    let b = landscape
        .basin(basin)
        .ok_or_else(|| Error::Config(format!("landscape has no basin named {basin:?}")))?
        .clone();

    let per_trial: Vec<Vec<EscapeTrialReport>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            configs
                .iter()
                .map(|cfg| {
                    let gamma = first_exit(landscape, b.center, |x| b.escaped(x), cfg, noise, master_seed, trial, budget)?;
                    Ok(EscapeTrialReport {
                        landscape: landscape.kind(),
                        basin: b.name.clone(),
                        optimizer: cfg.label.clone(),
                        noise: noise.clone(),
                        master_seed,
                        trial,
                        gamma,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = EscapeReport {
        basin: b.name.clone(),
        budget,
        trials: per_trial.into_iter().flatten().collect(),
        stats: Vec::new(),
    };
    report.stats = configs
        .iter()
        .map(|cfg| {
            let mut g = report.gammas(&cfg.label);
            g.sort_by(f64::total_cmp);
            let n = g.len();
            let median = if n % 2 == 1 { g[n / 2] } else { 0.5 * (g[n / 2 - 1] + g[n / 2]) };
            EscapeStats {
                optimizer: cfg.label.clone(),
                trials: n,
                censored: g.iter().filter(|&&x| x > budget as f64).count(),
                mean_gamma: g.iter().sum::<f64>() / n as f64,
                median_gamma: median,
            }
        })
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::OptimizerKind;
    use crate::problems::{basin_landscape, LandscapeParams};

    #[test]
    fn sign_test_values() {
        // 10 wins out of 10: p = 2^-10
        let t = sign_test(&[2.0; 10], &[1.0; 10]);
        assert!((t.p_value - 1.0 / 1024.0).abs() < 1e-15);
        let t = sign_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        assert_eq!((t.ties, t.p_value), (3, 1.0));
        // 1 win, 1 loss: P(X >= 1) = 3/4
        let t = sign_test(&[2.0, 0.0], &[1.0, 1.0]);
        assert!((t.p_value - 0.75).abs() < 1e-15);
    }

    #[test]
    fn silent_noise_never_escapes() {
        let l = basin_landscape(LandscapeParams::default_for(LandscapeKind::DoubleWellFlatSharp)).unwrap();
        let cfgs = [OptimizerConfig::defaults(OptimizerKind::Adamomentum), OptimizerConfig::defaults(OptimizerKind::Adam)];
        let noise = StableNoiseSpec::isotropic(1.5, 0.0).unwrap();
        let r = escape_harness(&l, "flat", &cfgs, &noise, 30, 200, 1).unwrap();
        assert!(r.trials.iter().all(|t| t.gamma.is_none()));
        assert!(r.stats.iter().all(|s| s.censored == 30));
    }

    #[test]
    fn argument_checks() {
        let l = basin_landscape(LandscapeParams::default_for(LandscapeKind::DoubleWellFlatSharp)).unwrap();
        let cfgs = [OptimizerConfig::defaults(OptimizerKind::Adam)];
        let noise = StableNoiseSpec::isotropic(1.5, 1e-4).unwrap();
        assert!(matches!(escape_harness(&l, "flat", &cfgs, &noise, 30, 0, 1), Err(Error::Config(_))));
        assert!(escape_harness(&l, "flat", &cfgs, &noise, 10, 10, 1).is_err());
        assert!(escape_harness(&l, "nope", &cfgs, &noise, 30, 10, 1).is_err());
    }
}
