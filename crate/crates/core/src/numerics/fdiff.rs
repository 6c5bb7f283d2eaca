use super::ParamVector;
use crate::error::{Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central-difference gradient of `f` at `x`.
///
/// Coordinate `i` is `(f(x + h e_i) - f(x - h e_i)) / (2h)`. A non-finite
/// evaluation is reported with the coordinate being perturbed.
pub fn finite_diff_grad<F>(f: F, x: &ParamVector, h: f64) -> Result<ParamVector>
where
    F: Fn(&ParamVector) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut probe = x.clone();
    let mut grad = ParamVector::zeros(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let up = f(&probe);
        probe[i] = xi - h;
        let down = f(&probe);
        probe[i] = xi;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite {
                context: "finite_diff_grad",
                index: Some(i),
            });
        }
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere(x: &ParamVector) -> f64 {
        x.norm_sq()
    }

    fn rosenbrock(x: &ParamVector) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn sphere_gradient() {
        let g = finite_diff_grad(sphere, &ParamVector::new(vec![1.0, 1.0]), 1e-5).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 2.0).abs() < 1e-8, "{g:?}");
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let x = ParamVector::new(vec![0.3, -7.0, 12.5]);
        let g = finite_diff_grad(|_| 4.25, &x, 1e-5).unwrap();
        assert!(g.max_abs() < 1e-10);
    }

    #[test]
    fn rosenbrock_minimum() {
        let g = finite_diff_grad(rosenbrock, &ParamVector::new(vec![1.0, 1.0]), 1e-5).unwrap();
        assert!(g.max_abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn non_finite_evaluation_carries_index() {
        let x = ParamVector::new(vec![1.0, 0.0]);
        // pole sits exactly at x + h e_1
        let err = finite_diff_grad(|p| 1.0 / (p[1] - 1e-5), &x, 1e-5).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: Some(1), .. }), "{err}");
    }

    #[test]
    fn rejects_nonpositive_step() {
        let x = ParamVector::zeros(2);
        assert!(finite_diff_grad(sphere, &x, 0.0).is_err());
    }

    proptest! {
        // Central differences are exact on quadratics up to rounding.
        #[test]
        fn exact_on_quadratics(
            a in prop::collection::vec(0.1f64..5.0, 3),
            b in prop::collection::vec(-3.0f64..3.0, 3),
            c in -1.0f64..1.0,
            x in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            let f = |p: &ParamVector| {
                (0..3).map(|i| 0.5 * a[i] * p[i] * p[i] + b[i] * p[i]).sum::<f64>() + c * p[0] * p[1]
            };
            let x = ParamVector::new(x);
            let g = finite_diff_grad(f, &x, 1e-5).unwrap();
            let exact = [
                a[0] * x[0] + b[0] + c * x[1],
                a[1] * x[1] + b[1] + c * x[0],
                a[2] * x[2] + b[2],
            ];
            for i in 0..3 {
                let rel = (g[i] - exact[i]).abs() / exact[i].abs().max(1.0);
                prop_assert!(rel < 1e-8, "coord {} fd {} exact {}", i, g[i], exact[i]);
            }
        }
    }
}
