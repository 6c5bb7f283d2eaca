//! Objectives: analytic test functions, an online quadratic stream, a small
//! MLP with hand-written backprop, 1-D basin landscapes and a noisy-gradient
//! wrapper.

mod landscape;
mod mlp;
mod noisy;
mod online;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ParamVector;

pub use landscape::{basin_landscape, Basin, BasinLandscape, LandscapeKind, LandscapeParams, Region};
pub use mlp::{
    init_weights, mlp_backward, mlp_forward, teacher_dataset, Activation, Dataset, LossKind, MlpCache,
    MlpProblem, MlpSpec, Targets,
};
pub use noisy::{noisy_grad, NoisyProblem};
pub use online::{online_quadratic_stream, OnlineConvexStream, OnlineQuadraticStream};

/// Tolerance for the stationarity check on a declared optimum.
pub const OPTIMUM_GRAD_TOL: f64 = 1e-8;

type EvalFn = dyn Fn(&ParamVector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&ParamVector) -> ParamVector + Send + Sync;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub point: ParamVector,
    pub value: f64,
}

/// A deterministic objective with its gradient oracle.
#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    eval: Arc<EvalFn>,
    grad: Arc<GradFn>,
    optimum: Option<Optimum>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("optimum", &self.optimum)
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Builds a problem, verifying that a declared optimum is stationary and
    /// that its stated value matches the objective.
    pub fn new<F, G>(name: impl Into<String>, dim: usize, eval: F, grad: G, optimum: Option<Optimum>) -> Result<Self>
    where
        F: Fn(&ParamVector) -> f64 + Send + Sync + 'static,
        G: Fn(&ParamVector) -> ParamVector + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Domain("problem dimension must be at least 1".into()));
        }
        let p = Problem {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            optimum,
        };
        if let Some(opt) = &p.optimum {
            opt.point.check_len(dim, "optimum")?;
            let g = p.grad(&opt.point)?;
            if g.max_abs() > OPTIMUM_GRAD_TOL {
                return Err(Error::Config(format!(
                    "{}: declared optimum is not stationary (|grad|_inf = {:e})",
                    p.name,
                    g.max_abs()
                )));
            }
            let f = p.eval(&opt.point)?;
            if (f - opt.value).abs() > OPTIMUM_GRAD_TOL * opt.value.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "{}: declared optimum value {} but f = {}",
                    p.name, opt.value, f
                )));
            }
        }
        Ok(p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }

    pub fn eval(&self, x: &ParamVector) -> Result<f64> {
        x.check_len(self.dim, "problem eval")?;
        Ok((self.eval)(x))
    }

    pub fn grad(&self, x: &ParamVector) -> Result<ParamVector> {
        x.check_len(self.dim, "problem grad")?;
        Ok((self.grad)(x))
    }
}

/// `f(x) = Σ xᵢ²`
pub fn sphere(dim: usize) -> Result<Problem> {
    Problem::new(
        "sphere",
        dim,
        |x| x.norm_sq(),
        |x| x.scale(2.0),
        Some(Optimum {
            point: ParamVector::zeros(dim),
            value: 0.0,
        }),
    )
}

/// `f(x) = Σ 100 (x_{i+1} - xᵢ²)² + (1 - xᵢ)²`, minimum at all-ones.
pub fn rosenbrock(dim: usize) -> Result<Problem> {
    if dim < 2 {
        return Err(Error::Domain(format!("rosenbrock needs dim >= 2, got {dim}")));
    }
    Problem::new(
        "rosenbrock",
        dim,
        |x| {
            x.windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum()
        },
        |x| {
            let mut g = ParamVector::zeros(x.len());
            for i in 0..x.len() - 1 {
                let r = x[i + 1] - x[i] * x[i];
                g[i] += -400.0 * x[i] * r - 2.0 * (1.0 - x[i]);
                g[i + 1] += 200.0 * r;
            }
            g
        },
        Some(Optimum {
            point: ParamVector::filled(dim, 1.0),
            value: 0.0,
        }),
    )
}

/// `f(x) = ½ xᵀ D x` with `D` log-spaced from 1 to `condition_number`.
pub fn ill_conditioned_quadratic(dim: usize, condition_number: f64) -> Result<Problem> {
    if !(condition_number >= 1.0 && condition_number.is_finite()) {
        return Err(Error::Config(format!(
            "condition number must be >= 1, got {condition_number}"
        )));
    }
    let diag: ParamVector = (0..dim)
        .map(|i| {
            if dim == 1 {
                1.0
            } else {
                condition_number.powf(i as f64 / (dim - 1) as f64)
            }
        })
        .collect();
    let d2 = diag.clone();
    Problem::new(
        "quadratic",
        dim,
        move |x| 0.5 * x.iter().zip(diag.iter()).map(|(x, d)| d * x * x).sum::<f64>(),
        move |x| x.zip_map(&d2, |x, d| d * x),
        Some(Optimum {
            point: ParamVector::zeros(dim),
            value: 0.0,
        }),
    )
}

/// Constant objective; every point is optimal.
pub fn constant(dim: usize, value: f64) -> Result<Problem> {
    Problem::new(
        "constant",
        dim,
        move |_| value,
        |x| ParamVector::zeros(x.len()),
        Some(Optimum {
            point: ParamVector::zeros(dim),
            value,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::from(v)
    }

    #[test]
    fn sphere_values() {
        let s = sphere(2).unwrap();
        assert_eq!(s.eval(&pv(&[1.0, 1.0])).unwrap(), 2.0);
        assert_eq!(s.grad(&pv(&[1.0, 1.0])).unwrap(), pv(&[2.0, 2.0]));
        assert_eq!(s.eval(&pv(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(s.eval(&pv(&[3.0, -4.0])).unwrap(), 25.0);
        assert_eq!(s.grad(&pv(&[3.0, -4.0])).unwrap(), pv(&[6.0, -8.0]));
    }

    #[test]
    fn rosenbrock_minimum() {
        let r = rosenbrock(2).unwrap();
        assert_eq!(r.eval(&pv(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(r.grad(&pv(&[1.0, 1.0])).unwrap().max_abs(), 0.0);
        assert!(rosenbrock(1).is_err());
    }

    #[test]
    fn quadratic_diagonal_endpoints() {
        let q = ill_conditioned_quadratic(5, 100.0).unwrap();
        let e1 = ParamVector::basis(5, 0);
        assert!((q.eval(&e1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(q.grad(&e1).unwrap(), e1);
        let ed = ParamVector::basis(5, 4);
        let g = q.grad(&ed).unwrap();
        assert!((g[4] - 100.0).abs() < 1e-12);
        assert!(matches!(ill_conditioned_quadratic(3, 0.5), Err(Error::Config(_))));
    }

    #[test]
    fn non_stationary_optimum_is_rejected() {
        let bad = Problem::new(
            "shifted",
            1,
            |x| (x[0] - 1.0).powi(2),
            |x| ParamVector::new(vec![2.0 * (x[0] - 1.0)]),
            Some(Optimum {
                point: ParamVector::zeros(1),
                value: 1.0,
            }),
        );
        assert!(matches!(bad, Err(Error::Config(_))));
    }

    #[test]
    fn length_mismatch() {
        let s = sphere(3).unwrap();
        assert!(matches!(s.grad(&ParamVector::zeros(2)), Err(Error::Shape { .. })));
    }
}
