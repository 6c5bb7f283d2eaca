use serde::{Deserialize, Serialize};

use super::GradientOracle;
use crate::error::{Error, Result};
use crate::numerics::ParamVector;
use crate::optim::{OptimizerConfig, OptimizerState};
use crate::problems::OnlineConvexStream;

/// Number of log-spaced sample points used by [`final_decade_slope`].
pub const FIT_POINTS: usize = 64;

/// Ordinary least-squares slope of `ln y` against `ln x`.
///
/// Points with non-positive or non-finite coordinates are skipped; fewer
/// than two usable points give NaN.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// Log-log slope of `series` (indexed so that `series[i]` belongs to
/// `x = i + offset`) over the final decade `[x_max / 10, x_max]`, sampled at
/// [`FIT_POINTS`] log-spaced indices.
pub fn final_decade_slope(series: &[f64], offset: usize) -> f64 {
    if series.is_empty() {
        return f64::NAN;
    }
    let x_max = (series.len() - 1 + offset) as f64;
    let x_min = (x_max / 10.0).max(offset.max(1) as f64);
    let mut idx: Vec<usize> = (0..FIT_POINTS)
        .map(|k| {
            let x = x_min * (x_max / x_min).powf(k as f64 / (FIT_POINTS - 1) as f64);
            (x.round() as usize).clamp(offset, series.len() - 1 + offset) - offset
        })
        .collect();
    idx.dedup();
    let pts: Vec<(f64, f64)> = idx.into_iter().map(|i| ((i + offset) as f64, series[i])).collect();
    loglog_slope(&pts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub label: String,
    /// `R(T')` for `T' = 1..=T` (index `T' − 1`).
    pub regret: Vec<f64>,
    /// `R(T') / T'`.
    pub average_regret: Vec<f64>,
    /// `f_t(θ_t)` as played.
    pub losses: Vec<f64>,
    pub slope: f64,
}

/// Plays the optimizer against the stream and measures regret against the
/// exact best fixed point in hindsight for every prefix.
pub fn regret_harness(
    stream: &dyn OnlineConvexStream,
    config: &OptimizerConfig,
    theta0: &ParamVector,
) -> Result<RegretReport> {
    let horizon = stream.horizon();
    if stream.prefix_comparator_loss(horizon).is_none() {
        return Err(Error::Config("regret harness needs a stream with an exact comparator".into()));
    }
    config.hyper.validate()?;
    theta0.check_len(stream.dim(), "theta0")?;
    let mut state = OptimizerState::new(config.kind.kernel(), stream.dim());
    let mut theta = theta0.clone();
    let mut losses = Vec::with_capacity(horizon);
    let mut regret = Vec::with_capacity(horizon);
    let mut played = 0.0;
    for t in 1..=horizon {
        let loss = stream.loss(t, &theta);
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                context: "online loss",
                index: None,
            });
        }
        played += loss;
        losses.push(loss);
        regret.push(played - stream.prefix_comparator_loss(t).unwrap());
        let g = stream.grad(t, &theta);
        state.step(&mut theta, &g, &config.hyper)?;
    }
    let average_regret: Vec<f64> = regret.iter().enumerate().map(|(i, r)| r / (i + 1) as f64).collect();
    let slope = final_decade_slope(&average_regret, 1);
    Ok(RegretReport {
        label: config.label.clone(),
        regret,
        average_regret,
        losses,
        slope,
    })
}

/// `R(T)` recomputed from the stored losses and an explicit evaluation of
/// the comparator, independent of the running sums used online.
pub fn recompute_regret(stream: &dyn OnlineConvexStream, report: &RegretReport) -> Result<f64> {
    let t = report.losses.len();
    let star = stream
        .prefix_comparator(t)
        .ok_or_else(|| Error::Config("stream has no exact comparator".into()))?;
    let comparator: f64 = (1..=t).map(|s| stream.loss(s, &star)).sum();
    Ok(report.losses.iter().sum::<f64>() - comparator)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub label: String,
    /// `A(T') = Σ_{t=0}^{T'} ‖∇f(θ_t)‖² / (T' + 1)` for `T' = 0..=T`.
    pub running_avg: Vec<f64>,
    pub slope: f64,
    pub final_theta: ParamVector,
}

impl RateReport {
    pub fn at(&self, t: usize) -> f64 {
        self.running_avg[t]
    }
}

/// Tracks the running average of the true squared gradient norm over `steps`
/// updates driven by the oracle's (possibly noisy) gradients.
pub fn nonconvex_rate_harness<O: GradientOracle + ?Sized>(
    oracle: &mut O,
    config: &OptimizerConfig,
    theta0: &ParamVector,
    steps: usize,
) -> Result<RateReport> {
    config.hyper.validate()?;
    theta0.check_len(oracle.problem().dim(), "theta0")?;
    let mut state = OptimizerState::new(config.kind.kernel(), theta0.len());
    let mut theta = theta0.clone();
    let mut sum = 0.0;
    let mut running_avg = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        let true_sq = oracle.problem().grad(&theta)?.norm_sq();
        if !true_sq.is_finite() {
            return Err(Error::NonFinite {
                context: "gradient norm",
                index: None,
            });
        }
        sum += true_sq;
        running_avg.push(sum / (t + 1) as f64);
        if t < steps {
            let g = oracle.sample_grad(&theta)?;
            state.step(&mut theta, &g, &config.hyper)?;
        }
    }
    let slope = final_decade_slope(&running_avg, 0);
    Ok(RateReport {
        label: config.label.clone(),
        running_avg,
        slope,
        final_theta: theta,
    })
}
