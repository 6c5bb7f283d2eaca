use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ParamVector, RngStream};
use crate::problems::Problem;

/// Number of equally spaced angles averaged by the flatness score.
pub const FLATNESS_ANGLES: usize = 32;

const ORTHO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSlice {
    /// Offsets along each direction, shared by both axes.
    pub coords: Vec<f64>,
    /// `values[i][j] = f(θ + coords[i]·d₁ + coords[j]·d₂)`.
    pub values: Vec<Vec<f64>>,
    pub center_value: f64,
    /// Mean of `f(θ + r(cos φ d₁ + sin φ d₂)) − f(θ)` over the circle of radius `r`.
    pub flatness: f64,
    pub flatness_radius: f64,
}

/// Two orthonormal Gaussian directions (Gram–Schmidt).
pub fn random_directions(dim: usize, rng: &mut RngStream) -> Result<(ParamVector, ParamVector)> {
    if dim < 2 {
        return Err(Error::Domain(format!("need dim >= 2 for a 2-D slice, got {dim}")));
    }
    let draw = |rng: &mut RngStream| (0..dim).map(|_| rng.standard_normal()).collect::<ParamVector>();
    let d1 = draw(rng);
    let d1 = d1.scale(1.0 / d1.norm());
    let d2 = draw(rng);
    let d2 = d2.axpy(-d2.dot(&d1), &d1);
    let d2 = d2.scale(1.0 / d2.norm());
    Ok((d1, d2))
}

/// Loss on the `grid × grid` lattice spanning `[−radius, radius]²` in the
/// plane through `center` spanned by `d1`, `d2`, plus the flatness score at
/// `flatness_radius`.
pub fn loss_slice(
    problem: &Problem,
    center: &ParamVector,
    d1: &ParamVector,
    d2: &ParamVector,
    grid: usize,
    radius: f64,
    flatness_radius: f64,
) -> Result<LossSlice> {
    let dim = problem.dim();
    center.check_len(dim, "slice center")?;
    d1.check_len(dim, "slice direction")?;
    d2.check_len(dim, "slice direction")?;
    if (d1.norm() - 1.0).abs() > ORTHO_TOL || (d2.norm() - 1.0).abs() > ORTHO_TOL || d1.dot(d2).abs() > ORTHO_TOL {
        return Err(Error::Domain("slice directions must be orthonormal".into()));
    }
    if grid == 0 || !(radius >= 0.0) || !(flatness_radius >= 0.0) {
        return Err(Error::Config("grid must be >= 1 and radii >= 0".into()));
    }
    let at = |a: f64, b: f64| -> Result<f64> {
        let x: ParamVector = center
            .iter()
            .zip(d1.iter().zip(d2.iter()))
            .map(|(c, (u, v))| c + a * u + b * v)
            .collect();
        problem.eval(&x)
    };
    let coords: Vec<f64> = if grid == 1 {
        vec![0.0]
    } else {
        (0..grid).map(|i| -radius + 2.0 * radius * i as f64 / (grid - 1) as f64).collect()
    };
    let values = coords
        .iter()
        .map(|&a| coords.iter().map(|&b| at(a, b)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let center_value = problem.eval(center)?;
    let ring: f64 = (0..FLATNESS_ANGLES)
        .map(|k| {
            let phi = TAU * k as f64 / FLATNESS_ANGLES as f64;
            at(flatness_radius * phi.cos(), flatness_radius * phi.sin())
        })
        .sum::<Result<f64>>()?;
    Ok(LossSlice {
        coords,
        values,
        center_value,
        flatness: ring / FLATNESS_ANGLES as f64 - center_value,
        flatness_radius,
    })
}
