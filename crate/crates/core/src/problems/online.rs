use crate::error::{Error, Result};
use crate::numerics::{ParamVector, RngStream};

/// A sequence of convex losses `f_1, …, f_T` revealed one at a time.
pub trait OnlineConvexStream: Sync {
    fn dim(&self) -> usize;
    fn horizon(&self) -> usize;
    /// `f_t(θ)` for `t` in `1..=horizon`.
    fn loss(&self, t: usize, theta: &ParamVector) -> f64;
    fn grad(&self, t: usize, theta: &ParamVector) -> ParamVector;
    /// Exact minimizer of `Σ_{s ≤ t} f_s`, when the family admits one.
    fn prefix_comparator(&self, _t: usize) -> Option<ParamVector> {
        None
    }
    /// `min_θ Σ_{s ≤ t} f_s(θ)`, when available in closed form.
    fn prefix_comparator_loss(&self, _t: usize) -> Option<f64> {
        None
    }
}

/// `f_t(θ) = ½‖θ − c_t‖²`; the comparator over any prefix is the mean center.
#[derive(Debug, Clone)]
pub struct OnlineQuadraticStream {
    centers: Vec<ParamVector>,
    // Welford prefix statistics: index t holds the mean of the first t
    // centers and the sum of their squared deviations from it
    mean: Vec<ParamVector>,
    m2: Vec<f64>,
}

impl OnlineQuadraticStream {
    pub fn from_centers(centers: Vec<ParamVector>) -> Result<Self> {
        let Some(first) = centers.first() else {
            return Err(Error::Domain("online stream horizon must be at least 1".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::Domain("online stream dimension must be at least 1".into()));
        }
        let mut mean = Vec::with_capacity(centers.len() + 1);
        let mut m2 = Vec::with_capacity(centers.len() + 1);
        mean.push(ParamVector::zeros(dim));
        m2.push(0.0);
        for (i, c) in centers.iter().enumerate() {
            c.check_len(dim, "online stream center")?;
            let prev = mean.last().unwrap();
            let next = prev.axpy(1.0 / (i + 1) as f64, &c.sub(prev));
            let dm2 = c.sub(prev).dot(&c.sub(&next));
            m2.push(m2.last().unwrap() + dm2);
            mean.push(next);
        }
        Ok(OnlineQuadraticStream { centers, mean, m2 })
    }

    pub fn center(&self, t: usize) -> &ParamVector {
        &self.centers[t - 1]
    }

    /// Minimizer of the full-horizon cumulative loss.
    pub fn comparator(&self) -> ParamVector {
        self.prefix_comparator(self.horizon()).unwrap()
    }
}

/// Stream of `horizon` quadratics with centers `center + U[-radius, radius]^dim`.
pub fn online_quadratic_stream(
    dim: usize,
    horizon: usize,
    center: f64,
    radius: f64,
    rng: &mut RngStream,
) -> Result<OnlineQuadraticStream> {
    if !(radius >= 0.0 && radius.is_finite() && center.is_finite()) {
        return Err(Error::Domain(format!("invalid box center {center} / radius {radius}")));
    }
    let centers = (0..horizon)
        .map(|_| (0..dim).map(|_| center + rng.uniform(-radius, radius)).collect())
        .collect();
    OnlineQuadraticStream::from_centers(centers)
}

impl OnlineConvexStream for OnlineQuadraticStream {
    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn horizon(&self) -> usize {
        self.centers.len()
    }

    fn loss(&self, t: usize, theta: &ParamVector) -> f64 {
        0.5 * theta.sub(self.center(t)).norm_sq()
    }

    fn grad(&self, t: usize, theta: &ParamVector) -> ParamVector {
        theta.sub(self.center(t))
    }

    fn prefix_comparator(&self, t: usize) -> Option<ParamVector> {
        (1..=self.horizon())
            .contains(&t)
            .then(|| self.mean[t].clone())
    }

    fn prefix_comparator_loss(&self, t: usize) -> Option<f64> {
        // ½ Σ‖θ* − c_s‖² with θ* the prefix mean
        (1..=self.horizon()).contains(&t).then(|| 0.5 * self.m2[t])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;

    #[test]
    fn two_point_stream() {
        let s = OnlineQuadraticStream::from_centers(vec![ParamVector::new(vec![0.0]), ParamVector::new(vec![2.0])])
            .unwrap();
        let star = s.comparator();
        assert_eq!(star[0], 1.0);
        let total: f64 = (1..=2).map(|t| s.loss(t, &star)).sum();
        assert_eq!(total, 1.0);
        assert_eq!(s.prefix_comparator_loss(2).unwrap(), 1.0);
    }

    #[test]
    fn fixed_center_has_zero_comparator_loss() {
        let c = ParamVector::new(vec![0.3, -0.2]);
        let s = OnlineQuadraticStream::from_centers(vec![c.clone(); 10]).unwrap();
        assert!(s.comparator().sub(&c).max_abs() < 1e-15);
        assert!(s.prefix_comparator_loss(10).unwrap().abs() < 1e-14);
    }

    #[test]
    fn gradient_bounded_on_box() {
        let mut rng = derive_stream(1, 0);
        let s = online_quadratic_stream(4, 200, 0.0, 1.5, &mut rng).unwrap();
        for t in 1..=200 {
            let theta: ParamVector = (0..4).map(|_| rng.uniform(-1.5, 1.5)).collect();
            assert!(s.grad(t, &theta).max_abs() <= 2.0 * 1.5);
        }
    }

    #[test]
    fn empty_stream_rejected() {
        assert!(OnlineQuadraticStream::from_centers(vec![]).is_err());
    }
}
