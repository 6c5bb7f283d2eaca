//! Symmetric alpha-stable (SαS) sampling.
//!
//! Draws use the Chambers-Mallows-Stuck transform with skewness fixed at
//! zero. With `V ~ U(-π/2, π/2)` and `W ~ Exp(1)`:
//!
//! ```text
//! X = sin(a V) / cos(V)^(1/a) * (cos((1 - a) V) / W)^((1 - a) / a)
//! ```
//!
//! The standard variable has characteristic function `exp(-|λ|^a)`. At
//! `a = 2` this is a Gaussian with variance 2, at `a = 1` a standard Cauchy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ParamVector, RngStream};
use crate::error::{Error, Result};

/// Tail index and per-coordinate scale of centered SαS noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableNoiseSpec {
    pub tail_index: f64,
    /// One entry per coordinate, or a single entry broadcast to every coordinate.
    pub scale: Vec<f64>,
}

impl StableNoiseSpec {
    pub fn new(tail_index: f64, scale: Vec<f64>) -> Result<Self> {
        let spec = StableNoiseSpec { tail_index, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn isotropic(tail_index: f64, scale: f64) -> Result<Self> {
        Self::new(tail_index, vec![scale])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_index > 0.0 && self.tail_index <= 2.0) {
            return Err(Error::Domain(format!(
                "tail_index must lie in (0, 2], got {}",
                self.tail_index
            )));
        }
        if self.scale.is_empty() {
            return Err(Error::Domain("noise scale must not be empty".into()));
        }
        if let Some(s) = self.scale.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::Domain(format!(
                "noise scale must be finite and nonnegative, got {s}"
            )));
        }
        Ok(())
    }

    /// Scale applied to coordinate `i`.
    pub fn scale_at(&self, i: usize) -> f64 {
        if self.scale.len() == 1 {
            self.scale[0]
        } else {
            self.scale[i]
        }
    }

    pub fn is_silent(&self) -> bool {
        self.scale.iter().all(|&s| s == 0.0)
    }
}

/// One standard SαS draw (unit scale).
pub fn standard_sas(tail_index: f64, rng: &mut RngStream) -> f64 {
    let v = PI * (rng.open01() - 0.5);
    if tail_index == 1.0 {
        return v.tan();
    }
    let w = -rng.open01().ln();
    let a = tail_index;
    (a * v).sin() / v.cos().powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
}

/// `dim` independent SαS draws, coordinate `i` multiplied by `spec.scale_at(i)`.
pub fn sas_sample(spec: &StableNoiseSpec, rng: &mut RngStream, dim: usize) -> Result<ParamVector> {
    spec.validate()?;
    if dim == 0 {
        return Err(Error::Domain("sample dimension must be at least 1".into()));
    }
    if spec.scale.len() != 1 && spec.scale.len() != dim {
        return Err(Error::shape("sas_sample scale", dim, spec.scale.len()));
    }
    Ok((0..dim)
        .map(|i| spec.scale_at(i) * standard_sas(spec.tail_index, rng))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;

    #[test]
    fn rejects_bad_tail_index() {
        for bad in [0.0, -1.0, 2.5, f64::NAN] {
            let spec = StableNoiseSpec {
                tail_index: bad,
                scale: vec![1.0],
            };
            let mut rng = derive_stream(0, 0);
            assert!(matches!(
                sas_sample(&spec, &mut rng, 3),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn rejects_negative_scale() {
        assert!(StableNoiseSpec::isotropic(1.5, -0.1).is_err());
    }

    #[test]
    fn zero_scale_is_exactly_zero() {
        let spec = StableNoiseSpec::isotropic(1.5, 0.0).unwrap();
        let mut rng = derive_stream(1, 1);
        let x = sas_sample(&spec, &mut rng, 16).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn per_coordinate_scale_applies() {
        let spec = StableNoiseSpec::new(2.0, vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = derive_stream(5, 0);
        let x = sas_sample(&spec, &mut rng, 3).unwrap();
        assert_eq!(x[0], 0.0);
        assert_ne!(x[1], 0.0);
        assert_eq!(x[2], 0.0);
    }

    #[test]
    fn gaussian_case_has_variance_two() {
        let spec = StableNoiseSpec::isotropic(2.0, 1.0).unwrap();
        let mut rng = derive_stream(11, 0);
        let x = sas_sample(&spec, &mut rng, 1_000_000).unwrap();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 2.0).abs() / 2.0 < 0.02, "variance {var}");
    }

    #[test]
    fn cauchy_case_quartiles() {
        let spec = StableNoiseSpec::isotropic(1.0, 1.0).unwrap();
        let mut rng = derive_stream(12, 0);
        let mut x = sas_sample(&spec, &mut rng, 1_000_000).unwrap().into_inner();
        x.sort_by(f64::total_cmp);
        let q = |p: f64| x[(p * (x.len() - 1) as f64).round() as usize];
        let iqr = q(0.75) - q(0.25);
        assert!(q(0.5).abs() < 0.01, "median {}", q(0.5));
        assert!((iqr - 2.0).abs() / 2.0 < 0.03, "iqr {iqr}");
    }
}
