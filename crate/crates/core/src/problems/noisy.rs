use super::Problem;
use crate::error::Result;
use crate::numerics::{sas_sample, ParamVector, RngStream, StableNoiseSpec};

/// A problem whose gradient oracle adds i.i.d. SαS noise on every call.
#[derive(Debug, Clone)]
pub struct NoisyProblem {
    pub base: Problem,
    pub noise: StableNoiseSpec,
    pub rng: RngStream,
}

impl NoisyProblem {
    pub fn new(base: Problem, noise: StableNoiseSpec, rng: RngStream) -> Result<Self> {
        noise.validate()?;
        if noise.scale.len() != 1 {
            noise.scale.len().eq(&base.dim()).then_some(()).ok_or_else(|| {
                crate::error::Error::shape("noise scale", base.dim(), noise.scale.len())
            })?;
        }
        Ok(NoisyProblem { base, noise, rng })
    }
}

/// `∇f(θ) + ζ` with a fresh noise draw; exact gradient when the noise is silent.
pub fn noisy_grad(p: &mut NoisyProblem, theta: &ParamVector) -> Result<ParamVector> {
    let g = p.base.grad(theta)?;
    if p.noise.is_silent() {
        return Ok(g);
    }
    let zeta = sas_sample(&p.noise, &mut p.rng, g.len())?;
    Ok(g.add(&zeta))
}
