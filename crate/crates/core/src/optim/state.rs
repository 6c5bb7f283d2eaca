use serde::{Deserialize, Serialize};

use super::{EpsPlacement, HyperParams, KernelSpec, SecondMomentInput};
use super::hyper::DecayMode;
use crate::error::{Error, Result};
use crate::numerics::ParamVector;

/// Per-run optimizer memory: step counter and the two EMAs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    t: u64,
    m: ParamVector,
    v: ParamVector,
    kernel: KernelSpec,
    /// Running product of the (possibly scheduled) β₁ values.
    beta1_prod: f64,
    m_correction: f64,
    v_correction: f64,
    last_alpha: f64,
    last_beta1: f64,
}

impl OptimizerState {
    pub fn new(kernel: KernelSpec, dim: usize) -> Self {
        OptimizerState {
            t: 0,
            m: ParamVector::zeros(dim),
            v: ParamVector::zeros(dim),
            kernel,
            beta1_prod: 1.0,
            m_correction: 1.0,
            v_correction: 1.0,
            last_alpha: f64::NAN,
            last_beta1: f64::NAN,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &ParamVector {
        &self.m
    }

    pub fn v(&self) -> &ParamVector {
        &self.v
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// α_t used by the most recent step.
    pub fn last_alpha(&self) -> Option<f64> {
        (self.t > 0).then_some(self.last_alpha)
    }

    /// β₁,t used by the most recent step.
    pub fn last_beta1(&self) -> Option<f64> {
        (self.t > 0).then_some(self.last_beta1)
    }

    /// One update of the unified kernel. On error neither `params` nor the
    /// state is modified.
    pub fn step(&mut self, params: &mut ParamVector, grad: &ParamVector, hp: &HyperParams) -> Result<()> {
        let dim = self.dim();
        params.check_len(dim, "step params")?;
        grad.check_len(dim, "step grad")?;
        if let Some(i) = grad.first_non_finite() {
            return Err(Error::NonFinite {
                context: "step gradient",
                index: Some(i),
            });
        }
        hp.validate()?;

        let t = self.t + 1;
        let alpha = hp.alpha_at(t)?;
        let beta1 = hp.beta1_at(t)?;
        let beta2 = hp.beta2;
        let eps = hp.epsilon;
        let k = self.kernel;

        let beta1_prod = self.beta1_prod * beta1;
        let (m_corr, v_corr) = if k.bias_correction {
            let b1 = if hp.beta1_schedule.is_constant() {
                beta1.powf(t as f64)
            } else {
                beta1_prod
            };
            (1.0 - b1, 1.0 - beta2.powf(t as f64))
        } else {
            (1.0, 1.0)
        };
        let wd = if hp.decay_mode == DecayMode::Coupled { hp.weight_decay } else { 0.0 };

        let mut m = self.m.clone();
        let mut v = self.v.clone();
        let mut next = params.clone();
        for i in 0..dim {
            let g = grad[i] + wd * params[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            let input = match k.second_moment_input {
                SecondMomentInput::RawGrad => Some(g),
                SecondMomentInput::Momentum => Some(m[i]),
                SecondMomentInput::GradMinusMomentum => Some(g - m[i]),
                SecondMomentInput::None => None,
            };
            let m_hat = m[i] / m_corr;
            let update = match input {
                Some(u) => {
                    v[i] = beta2 * v[i] + (1.0 - beta2) * u * u;
                    if k.eps_placement == EpsPlacement::InsideAccumulator {
                        v[i] += eps;
                    }
                    let v_hat = v[i] / v_corr;
                    if k.sign_only {
                        sign(m_hat)
                    } else {
                        let denom = match k.eps_placement {
                            EpsPlacement::InsideAccumulator => v_hat.sqrt(),
                            EpsPlacement::OutsideSqrt => v_hat.sqrt() + eps,
                        };
                        if m_hat == 0.0 { 0.0 } else { m_hat / denom }
                    }
                }
                None if k.sign_only => sign(m_hat),
                None => m_hat,
            };
            next[i] -= alpha * update;
            if hp.decay_mode == DecayMode::Decoupled {
                next[i] -= alpha * hp.weight_decay * params[i];
            }
        }
        if let Some(i) = next.first_non_finite() {
            return Err(Error::NonFinite {
                context: "step update",
                index: Some(i),
            });
        }

        self.t = t;
        self.m = m;
        self.v = v;
        self.beta1_prod = beta1_prod;
        self.m_correction = m_corr;
        self.v_correction = v_corr;
        self.last_alpha = alpha;
        self.last_beta1 = beta1;
        *params = next;
        Ok(())
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Elementwise multiplier on m̂ applied at the last step.
pub fn effective_stepsize(state: &OptimizerState, hp: &HyperParams) -> Result<ParamVector> {
    if state.t == 0 {
        return Err(Error::State("effective stepsize is undefined before the first step"));
    }
    let alpha = state.last_alpha;
    if state.kernel.second_moment_input == SecondMomentInput::None {
        return Ok(ParamVector::filled(state.dim(), alpha));
    }
    Ok(state.v.map(|v| {
        let root = (v / state.v_correction).sqrt();
        match state.kernel.eps_placement {
            EpsPlacement::InsideAccumulator => alpha / root,
            EpsPlacement::OutsideSqrt => alpha / (root + hp.epsilon),
        }
    }))
}

/// Bias-corrected `(m̂, v̂)` as of the last step.
pub fn debiased_moments(state: &OptimizerState) -> Result<(ParamVector, ParamVector)> {
    if state.t == 0 {
        return Err(Error::State("moments are undefined before the first step"));
    }
    Ok((
        state.m.scale(1.0 / state.m_correction),
        state.v.scale(1.0 / state.v_correction),
    ))
}
