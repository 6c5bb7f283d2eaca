//! One-dimensional landscapes with named regions, all C¹ and piecewise
//! polynomial.
//!
//! A basin of depth `D`, center `c` and half-width `w` is the bump
//! `−D (1 − u²)²` with `u = (x − c)/w` for `|u| < 1` and zero outside; its
//! value and slope both vanish at `|u| = 1`, and its curvature at the center
//! is `4D / w²`.

use serde::{Deserialize, Serialize};

use super::{Optimum, Problem};
use crate::error::{Error, Result};
use crate::numerics::ParamVector;

/// Fraction of a basin's half-width used as the escape radius.
pub const ESCAPE_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeKind {
    DoubleWellFlatSharp,
    AsymmetricValley,
    PlateauSlopeBasin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LandscapeParams {
    /// Flat basin centered at −1, sharp basin at +1, equal depth.
    DoubleWellFlatSharp { w_flat: f64, w_sharp: f64, depth: f64 },
    /// Single basin at 0 whose walls have different half-widths.
    AsymmetricValley { w_left: f64, w_right: f64, depth: f64 },
    /// Gentle plateau, ramp into a steep constant slope, quadratic basin.
    ///
    /// `f'` is `−plateau_grad` up to `slope_start`, ramps linearly to
    /// `−slope_grad` at `ramp_end`, stays there until `basin_start`, then
    /// rises linearly to zero at `minimum`.
    PlateauSlopeBasin {
        plateau_start: f64,
        plateau_grad: f64,
        slope_start: f64,
        ramp_end: f64,
        slope_grad: f64,
        basin_start: f64,
        minimum: f64,
    },
}

impl LandscapeParams {
    pub fn kind(&self) -> LandscapeKind {
        match self {
            LandscapeParams::DoubleWellFlatSharp { .. } => LandscapeKind::DoubleWellFlatSharp,
            LandscapeParams::AsymmetricValley { .. } => LandscapeKind::AsymmetricValley,
            LandscapeParams::PlateauSlopeBasin { .. } => LandscapeKind::PlateauSlopeBasin,
        }
    }

    pub fn default_for(kind: LandscapeKind) -> Self {
        match kind {
            LandscapeKind::DoubleWellFlatSharp => LandscapeParams::DoubleWellFlatSharp {
                w_flat: 0.02,
                w_sharp: 0.02 / 10f64.sqrt(),
                depth: 2e-6,
            },
            LandscapeKind::AsymmetricValley => LandscapeParams::AsymmetricValley {
                w_left: 0.02,
                w_right: 0.005,
                depth: 2e-6,
            },
            LandscapeKind::PlateauSlopeBasin => LandscapeParams::PlateauSlopeBasin {
                plateau_start: -1.0,
                plateau_grad: 1e-3,
                slope_start: 0.0,
                ramp_end: 0.5,
                slope_grad: 1.0,
                basin_start: 1.5,
                minimum: 2.0,
            },
        }
    }
}

/// Named interval of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// A strict local minimum and the interval whose exit counts as escaping it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub name: String,
    pub center: f64,
    pub escape_lo: f64,
    pub escape_hi: f64,
}

impl Basin {
    pub fn escaped(&self, x: f64) -> bool {
        x < self.escape_lo || x > self.escape_hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinLandscape {
    pub params: LandscapeParams,
    pub regions: Vec<Region>,
    pub basins: Vec<Basin>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be > 0, got {x}")))
    }
}

fn region(name: &str, lo: f64, hi: f64) -> Region {
    Region {
        name: name.into(),
        lo,
        hi,
    }
}

fn basin(name: &str, center: f64, w_left: f64, w_right: f64) -> Basin {
    Basin {
        name: name.into(),
        center,
        escape_lo: center - ESCAPE_FRACTION * w_left,
        escape_hi: center + ESCAPE_FRACTION * w_right,
    }
}

pub fn basin_landscape(params: LandscapeParams) -> Result<BasinLandscape> {
    let (regions, basins) = match params {
        LandscapeParams::DoubleWellFlatSharp { w_flat, w_sharp, depth } => {
            positive("w_flat", w_flat)?;
            positive("w_sharp", w_sharp)?;
            positive("depth", depth)?;
            if w_sharp >= w_flat {
                return Err(Error::Config(format!(
                    "sharp basin must be narrower than the flat one (w_sharp {w_sharp} >= w_flat {w_flat})"
                )));
            }
            if w_flat >= 1.0 {
                return Err(Error::Config("basin half-widths must be < 1 so the wells stay apart".into()));
            }
            (
                vec![
                    region("flat_basin", -1.0 - w_flat, -1.0 + w_flat),
                    region("sharp_basin", 1.0 - w_sharp, 1.0 + w_sharp),
                ],
                vec![basin("flat", -1.0, w_flat, w_flat), basin("sharp", 1.0, w_sharp, w_sharp)],
            )
        }
        LandscapeParams::AsymmetricValley { w_left, w_right, depth } => {
            positive("w_left", w_left)?;
            positive("w_right", w_right)?;
            positive("depth", depth)?;
            (
                vec![region("valley", -w_left, w_right)],
                vec![basin("valley", 0.0, w_left, w_right)],
            )
        }
        LandscapeParams::PlateauSlopeBasin {
            plateau_start,
            plateau_grad,
            slope_start,
            ramp_end,
            slope_grad,
            basin_start,
            minimum,
        } => {
            positive("plateau_grad", plateau_grad)?;
            positive("slope_grad", slope_grad)?;
            let knots = [plateau_start, slope_start, ramp_end, basin_start, minimum];
            if knots.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config(format!("region boundaries must increase strictly: {knots:?}")));
            }
            let w = minimum - basin_start;
            (
                vec![
                    region("plateau", plateau_start, slope_start),
                    region("slope", slope_start, basin_start),
                    region("basin", basin_start, f64::INFINITY),
                ],
                vec![basin("basin", minimum, w, w)],
            )
        }
    };
    Ok(BasinLandscape {
        params,
        regions,
        basins,
    })
}

// value, slope, curvature of the bump
fn bump(x: f64, c: f64, w: f64, depth: f64) -> (f64, f64, f64) {
    let u = (x - c) / w;
    if u.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - u * u;
    (-depth * q * q, 4.0 * depth * u * q / w, 4.0 * depth * (1.0 - 3.0 * u * u) / (w * w))
}

impl BasinLandscape {
    pub fn kind(&self) -> LandscapeKind {
        self.params.kind()
    }

    /// `(f, f', f'')` at `x`.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        match self.params {
            LandscapeParams::DoubleWellFlatSharp { w_flat, w_sharp, depth } => {
                let a = bump(x, -1.0, w_flat, depth);
                let b = bump(x, 1.0, w_sharp, depth);
                (a.0 + b.0, a.1 + b.1, a.2 + b.2)
            }
            LandscapeParams::AsymmetricValley { w_left, w_right, depth } => {
                bump(x, 0.0, if x < 0.0 { w_left } else { w_right }, depth)
            }
            LandscapeParams::PlateauSlopeBasin {
                plateau_grad: p,
                slope_start: x0,
                ramp_end: x1,
                slope_grad: big_s,
                basin_start: x2,
                minimum: x3,
                ..
            } => {
                let l1 = x1 - x0;
                let f1 = -(p + big_s) * l1 / 2.0;
                let f2 = f1 - big_s * (x2 - x1);
                let k = big_s / (x3 - x2);
                if x <= x0 {
                    (-p * (x - x0), -p, 0.0)
                } else if x <= x1 {
                    let d = x - x0;
                    (-p * d + (p - big_s) * d * d / (2.0 * l1), -p + (p - big_s) * d / l1, (p - big_s) / l1)
                } else if x <= x2 {
                    (f1 - big_s * (x - x1), -big_s, 0.0)
                } else {
                    let r = x - x3;
                    (f2 + 0.5 * k * (r * r - (x2 - x3).powi(2)), k * r, k)
                }
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval_all(x).0
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.eval_all(x).1
    }

    pub fn curvature(&self, x: f64) -> f64 {
        self.eval_all(x).2
    }

    pub fn basin(&self, name: &str) -> Option<&Basin> {
        self.basins.iter().find(|b| b.name == name)
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    /// Region containing `x`, if any.
    pub fn region_of(&self, x: f64) -> Option<&Region> {
        self.regions.iter().find(|r| x >= r.lo && x < r.hi)
    }

    /// One-dimensional [`Problem`]; the declared optimum is the first basin.
    pub fn to_problem(&self) -> Result<Problem> {
        let (a, b) = (self.clone(), self.clone());
        let c = self.basins[0].center;
        Problem::new(
            format!("{:?}", self.kind()),
            1,
            move |x| a.value(x[0]),
            move |x| ParamVector::new(vec![b.slope(x[0])]),
            Some(Optimum {
                point: ParamVector::new(vec![c]),
                value: self.value(c),
            }),
        )
    }
}
