//! Turns an [`ExperimentConfig`] into problems, start points and noise.

use super::config::{ExperimentConfig, ProblemName, ProblemParams};
use crate::error::{Error, Result};
use crate::numerics::{derive_stream, ParamVector, StableNoiseSpec};
use crate::problems::{
    basin_landscape, ill_conditioned_quadratic, init_weights, online_quadratic_stream, rosenbrock, sphere,
    teacher_dataset, Activation, BasinLandscape, LandscapeKind, LandscapeParams, LossKind, MlpProblem, MlpSpec,
    OnlineQuadraticStream, Problem,
};

/// Stream ids under the run seed; trial `k` of a multi-trial command adds `k`.
pub(crate) const STREAM_NOISE: u64 = 1;
pub(crate) const STREAM_INIT: u64 = 1_000;
pub(crate) const STREAM_BATCH: u64 = 2_000;
pub(crate) const STREAM_DIRECTIONS: u64 = 3_000;
pub(crate) const STREAM_ONLINE: u64 = 4_000;

pub(crate) fn landscape_kind(name: ProblemName) -> Option<LandscapeKind> {
    match name {
        ProblemName::DoubleWellFlatSharp => Some(LandscapeKind::DoubleWellFlatSharp),
        ProblemName::AsymmetricValley => Some(LandscapeKind::AsymmetricValley),
        ProblemName::PlateauSlopeBasin => Some(LandscapeKind::PlateauSlopeBasin),
        _ => None,
    }
}

pub(crate) fn landscape(cfg: &ExperimentConfig) -> Result<BasinLandscape> {
    let kind = landscape_kind(cfg.problem.name)
        .ok_or_else(|| Error::Config(format!("problem {:?} is not a basin landscape", cfg.problem.name)))?;
    if cfg.problem.dim.is_some_and(|d| d != 1) {
        return Err(Error::Config("basin landscapes are one-dimensional; problem.dim must be 1".into()));
    }
    let p = &cfg.problem.params;
    let params = match LandscapeParams::default_for(kind) {
        LandscapeParams::DoubleWellFlatSharp { w_flat, w_sharp, depth } => {
            let wf = p.w_flat.unwrap_or(w_flat);
            LandscapeParams::DoubleWellFlatSharp {
                w_flat: wf,
                // keep the default curvature ratio when only w_flat is given
                w_sharp: p.w_sharp.unwrap_or(wf * w_sharp / w_flat),
                depth: p.depth.unwrap_or(depth),
            }
        }
        LandscapeParams::AsymmetricValley { w_left, w_right, depth } => LandscapeParams::AsymmetricValley {
            w_left: p.w_left.unwrap_or(w_left),
            w_right: p.w_right.unwrap_or(w_right),
            depth: p.depth.unwrap_or(depth),
        },
        LandscapeParams::PlateauSlopeBasin {
            plateau_start,
            plateau_grad,
            slope_start,
            ramp_end,
            slope_grad,
            basin_start,
            minimum,
        } => LandscapeParams::PlateauSlopeBasin {
            plateau_start: p.plateau_start.unwrap_or(plateau_start),
            plateau_grad: p.plateau_grad.unwrap_or(plateau_grad),
            slope_start: p.slope_start.unwrap_or(slope_start),
            ramp_end: p.ramp_end.unwrap_or(ramp_end),
            slope_grad: p.slope_grad.unwrap_or(slope_grad),
            basin_start: p.basin_start.unwrap_or(basin_start),
            minimum: p.minimum.unwrap_or(minimum),
        },
    };
    basin_landscape(params)
}

pub(crate) fn mlp(params: &ProblemParams) -> Result<MlpProblem> {
    let spec = MlpSpec::new(
        params.widths.clone().unwrap_or_else(|| vec![10, 30, 30, 30, 30, 3]),
        params.activation.unwrap_or(Activation::Tanh),
        params.loss.unwrap_or(LossKind::Mse),
    )?;
    if spec.loss != LossKind::Mse {
        return Err(Error::Config("the teacher dataset is a regression task; use loss = \"mse\"".into()));
    }
    let data = teacher_dataset(&spec, params.samples.unwrap_or(512), &mut derive_stream(params.teacher_seed.unwrap_or(99), 0))?;
    MlpProblem::new(spec, data)
}

pub(crate) fn online_stream(cfg: &ExperimentConfig) -> Result<OnlineQuadraticStream> {
    let p = &cfg.problem.params;
    online_quadratic_stream(
        cfg.problem.dim.unwrap_or(10),
        cfg.run.steps as usize,
        p.center.unwrap_or(0.5),
        p.radius.unwrap_or(1.0),
        &mut derive_stream(cfg.run.seed, STREAM_ONLINE),
    )
}

/// Deterministic objective for `run`, `race`, `rate` and `slice`.
pub(crate) fn problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let dim = cfg.problem.dim;
    match cfg.problem.name {
        ProblemName::Sphere => sphere(dim.unwrap_or(2)),
        ProblemName::Rosenbrock => rosenbrock(dim.unwrap_or(2)),
        ProblemName::Quadratic => {
            ill_conditioned_quadratic(dim.unwrap_or(10), cfg.problem.params.condition_number.unwrap_or(10.0))
        }
        ProblemName::Mlp => mlp(&cfg.problem.params)?.to_problem(),
        ProblemName::OnlineQuadratic => Err(Error::Config(
            "online_quadratic is a loss stream; use the regret subcommand".into(),
        )),
        _ => landscape(cfg)?.to_problem(),
    }
}

/// Start point: `params.start` (broadcast if it has one entry) or a
/// per-problem default.
pub(crate) fn start(cfg: &ExperimentConfig, dim: usize, trial: u64) -> Result<ParamVector> {
    if let Some(s) = &cfg.problem.params.start {
        return match s.len() {
            1 => Ok(ParamVector::filled(dim, s[0])),
            n if n == dim => Ok(ParamVector::from(s.as_slice())),
            n => Err(Error::Config(format!("problem.params.start has {n} entries, expected 1 or {dim}"))),
        };
    }
    Ok(match cfg.problem.name {
        ProblemName::Sphere | ProblemName::Quadratic => ParamVector::filled(dim, 1.0),
        ProblemName::Rosenbrock => (0..dim).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect(),
        ProblemName::OnlineQuadratic => ParamVector::zeros(dim),
        ProblemName::Mlp => {
            let spec = mlp(&cfg.problem.params)?.spec;
            init_weights(&spec, &mut derive_stream(cfg.run.seed, STREAM_INIT + trial))
        }
        _ => {
            let l = landscape(cfg)?;
            match l.region("plateau") {
                Some(r) => ParamVector::new(vec![0.5 * (r.lo + r.hi)]),
                None => ParamVector::new(vec![l.basins[0].center]),
            }
        }
    })
}

/// Gradient-noise spec from the problem params, if any is configured.
pub(crate) fn noise(params: &ProblemParams) -> Result<Option<StableNoiseSpec>> {
    match (params.tail_index, params.noise_scale) {
        (None, None) => Ok(None),
        (tail, scale) => Ok(Some(StableNoiseSpec::isotropic(tail.unwrap_or(2.0), scale.unwrap_or(0.0))?)),
    }
}
