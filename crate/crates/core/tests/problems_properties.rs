use adamomentum::numerics::{derive_stream, finite_diff_grad, ParamVector, RngStream};
use adamomentum::problems::{
    basin_landscape, ill_conditioned_quadratic, init_weights, mlp_backward, mlp_forward, online_quadratic_stream,
    rosenbrock, sphere, Activation, Dataset, LandscapeKind, LandscapeParams, LossKind, MlpSpec, OnlineConvexStream,
    Problem, Targets,
};
use ndarray::Array2;

fn probe(p: &Problem, rng: &mut RngStream, radius: f64) {
    let opt = p.optimum().expect("declared optimum");
    assert!(p.grad(&opt.point).unwrap().max_abs() <= 1e-8, "{}", p.name());
    for _ in 0..1000 {
        let x: ParamVector = opt.point.iter().map(|c| c + rng.uniform(-radius, radius)).collect();
        assert!(p.eval(&x).unwrap() >= opt.value, "{} at {x:?}", p.name());
    }
}

#[test]
fn declared_optima_are_stationary_and_minimal() {
    let mut rng = derive_stream(17, 0);
    probe(&sphere(5).unwrap(), &mut rng, 10.0);
    probe(&rosenbrock(2).unwrap(), &mut rng, 2.0);
    probe(&rosenbrock(6).unwrap(), &mut rng, 2.0);
    probe(&ill_conditioned_quadratic(8, 1e3).unwrap(), &mut rng, 5.0);
    for kind in [LandscapeKind::AsymmetricValley, LandscapeKind::PlateauSlopeBasin] {
        let l = basin_landscape(LandscapeParams::default_for(kind)).unwrap();
        probe(&l.to_problem().unwrap(), &mut rng, 3.0);
    }
    let dw = basin_landscape(LandscapeParams::default_for(LandscapeKind::DoubleWellFlatSharp)).unwrap();
    probe(&dw.to_problem().unwrap(), &mut rng, 3.0);
}

#[test]
fn backprop_matches_finite_differences_on_random_draws() {
    let mut rng = derive_stream(23, 0);
    for draw in 0..20 {
        let depth = 1 + rng.index(4);
        let mut widths: Vec<usize> = (0..=depth).map(|_| 1 + rng.index(6)).collect();
        let classify = draw % 3 == 2;
        if classify {
            *widths.last_mut().unwrap() = 2 + rng.index(3);
        }
        let activation = if draw % 2 == 0 { Activation::Tanh } else { Activation::Relu };
        let loss = if classify { LossKind::SoftmaxCrossEntropy } else { LossKind::Mse };
        let spec = MlpSpec::new(widths.clone(), activation, loss).unwrap();
        let n = 1 + rng.index(8);
        let w = init_weights(&spec, &mut rng).map(|x| x + 0.1);
        let inputs = Array2::from_shape_fn((n, widths[0]), |_| rng.standard_normal());
        let out = spec.output_dim();
        let targets = if classify {
            Targets::Classes((0..n).map(|_| rng.index(out)).collect())
        } else {
            Targets::Regression(Array2::from_shape_fn((n, out), |_| rng.standard_normal()))
        };
        let data = Dataset::new(inputs, targets).unwrap();
        let (_, cache) = mlp_forward(&spec, &w, &data).unwrap();
        let g = mlp_backward(&spec, &cache).unwrap();
        let fd = finite_diff_grad(|p| mlp_forward(&spec, p, &data).unwrap().0, &w, 1e-5).unwrap();
        let worst = g
            .iter()
            .zip(fd.iter())
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "draw {draw} {widths:?} {activation:?}: rel err {worst:e}");
    }
}

#[test]
fn stream_comparator_beats_perturbations() {
    let mut rng = derive_stream(31, 0);
    let s = online_quadratic_stream(5, 300, 0.5, 1.0, &mut rng).unwrap();
    let star = s.comparator();
    let total = |theta: &ParamVector| (1..=s.horizon()).map(|t| s.loss(t, theta)).sum::<f64>();
    let best = total(&star);
    assert!((best - s.prefix_comparator_loss(300).unwrap()).abs() <= 1e-9 * best);
    for _ in 0..1000 {
        let scale = 10f64.powf(rng.uniform(-6.0, 0.0));
        let delta: ParamVector = (0..5).map(|_| scale * rng.standard_normal()).collect();
        assert!(best <= total(&star.add(&delta)));
    }
}
