use std::sync::Arc;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::Problem;
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `½ · mean_n ‖y_n − τ_n‖²`
    Mse,
    /// Mean negative log-softmax of the labelled class.
    SoftmaxCrossEntropy,
}

/// Fully connected network. `widths[0]` is the input size, the last entry
/// the output size; hidden layers use `activation`, the output is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub loss: LossKind,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, activation: Activation, loss: LossKind) -> Result<Self> {
        let spec = MlpSpec {
            widths,
            activation,
            loss,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 || self.widths.contains(&0) {
            return Err(Error::Config(format!(
                "mlp widths must have >= 2 positive entries, got {:?}",
                self.widths
            )));
        }
        if self.loss == LossKind::SoftmaxCrossEntropy && self.output_dim() < 2 {
            return Err(Error::Config("cross-entropy needs at least 2 outputs".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    /// Parameter layout: for each layer, `W` (out × in, row-major) then `b`.
    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    fn layer_offsets(&self) -> Vec<(usize, usize, usize)> {
        let mut off = 0;
        self.widths
            .windows(2)
            .map(|w| {
                let start = off;
                off += w[1] * w[0] + w[1];
                (start, w[0], w[1])
            })
            .collect()
    }

    fn layers<'a>(&self, weights: &'a [f64]) -> Vec<(ArrayView2<'a, f64>, ArrayView1<'a, f64>)> {
        self.layer_offsets()
            .into_iter()
            .map(|(start, n_in, n_out)| {
                let w = ArrayView2::from_shape((n_out, n_in), &weights[start..start + n_out * n_in]).unwrap();
                let b_start = start + n_out * n_in;
                let b = ArrayView1::from(&weights[b_start..b_start + n_out]);
                (w, b)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Regression(Array2<f64>),
    Classes(Vec<usize>),
}

impl Targets {
    fn len(&self) -> usize {
        match self {
            Targets::Regression(t) => t.nrows(),
            Targets::Classes(c) => c.len(),
        }
    }
}

/// Inputs (one row per example) with matching targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub targets: Targets,
}

impl Dataset {
    pub fn new(inputs: Array2<f64>, targets: Targets) -> Result<Self> {
        if inputs.nrows() != targets.len() {
            return Err(Error::shape("dataset targets", inputs.nrows(), targets.len()));
        }
        Ok(Dataset { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            inputs: self.inputs.select(Axis(0), rows),
            targets: match &self.targets {
                Targets::Regression(t) => Targets::Regression(t.select(Axis(0), rows)),
                Targets::Classes(c) => Targets::Classes(rows.iter().map(|&i| c[i]).collect()),
            },
        }
    }
}

/// Everything `mlp_backward` needs from the forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    weights: Vec<f64>,
    /// `a_0 = X`, then post-activation outputs of each layer (the last is the logits).
    activations: Vec<Array2<f64>>,
    /// dL/d(logits)
    output_delta: Array2<f64>,
}

fn check_batch(spec: &MlpSpec, weights: &[f64], batch: &Dataset) -> Result<()> {
    spec.validate()?;
    if weights.len() != spec.num_params() {
        return Err(Error::shape("mlp weights", spec.num_params(), weights.len()));
    }
    if batch.is_empty() {
        return Err(Error::Domain("mlp batch must be nonempty".into()));
    }
    if batch.inputs.ncols() != spec.input_dim() {
        return Err(Error::shape("mlp inputs", spec.input_dim(), batch.inputs.ncols()));
    }
    match (&batch.targets, spec.loss) {
        (Targets::Regression(t), LossKind::Mse) if t.ncols() == spec.output_dim() => Ok(()),
        (Targets::Regression(t), LossKind::Mse) => Err(Error::shape("mlp targets", spec.output_dim(), t.ncols())),
        (Targets::Classes(c), LossKind::SoftmaxCrossEntropy) => match c.iter().find(|&&k| k >= spec.output_dim()) {
            Some(&k) => Err(Error::shape("mlp class label", spec.output_dim(), k)),
            None => Ok(()),
        },
        _ => Err(Error::Config("target kind does not match the loss".into())),
    }
}

/// Loss on `batch` and the cache for the backward pass.
pub fn mlp_forward(spec: &MlpSpec, weights: &ParamVector, batch: &Dataset) -> Result<(f64, MlpCache)> {
    check_batch(spec, weights, batch)?;
    let layers = spec.layers(weights);
    let last = layers.len() - 1;
    let mut activations = vec![batch.inputs.clone()];
    for (l, (w, b)) in layers.iter().enumerate() {
        let mut z = activations[l].dot(&w.t());
        z += b;
        if l < last {
            match spec.activation {
                Activation::Tanh => z.mapv_inplace(f64::tanh),
                Activation::Relu => z.mapv_inplace(|x| x.max(0.0)),
            }
        }
        activations.push(z);
    }
    let out = activations.last().unwrap();
    let n = batch.len() as f64;
    let (loss, output_delta) = match &batch.targets {
        Targets::Regression(t) => {
            let diff = out - t;
            let loss = 0.5 * diff.mapv(|d| d * d).sum() / n;
            (loss, diff / n)
        }
        Targets::Classes(labels) => {
            let mut delta = Array2::zeros(out.raw_dim());
            let mut loss = 0.0;
            for (i, row) in out.outer_iter().enumerate() {
                let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let exps = row.mapv(|x| (x - max).exp());
                let z: f64 = exps.sum();
                loss -= row[labels[i]] - max - z.ln();
                let mut d = delta.row_mut(i);
                d.assign(&(exps / z));
                d[labels[i]] -= 1.0;
            }
            (loss / n, delta / n)
        }
    };
    Ok((
        loss,
        MlpCache {
            weights: weights.to_vec(),
            activations,
            output_delta,
        },
    ))
}

/// Gradient of the forward loss with respect to the flattened weights.
pub fn mlp_backward(spec: &MlpSpec, cache: &MlpCache) -> Result<ParamVector> {
    if cache.weights.len() != spec.num_params() || cache.activations.len() != spec.widths.len() {
        return Err(Error::shape("mlp cache", spec.num_params(), cache.weights.len()));
    }
    let layers = spec.layers(&cache.weights);
    let offsets = spec.layer_offsets();
    let mut grad = vec![0.0; spec.num_params()];
    let mut delta = cache.output_delta.clone();
    for l in (0..layers.len()).rev() {
        let (start, n_in, n_out) = offsets[l];
        let a_prev = &cache.activations[l];
        let dw = delta.t().dot(a_prev);
        let db = delta.sum_axis(Axis(0));
        // logical (row-major) order, whatever the memory layout of dw
        let dst = grad[start..start + n_out * n_in + n_out].iter_mut();
        for (g, x) in dst.zip(dw.iter().chain(db.iter())) {
            *g = *x;
        }
        if l > 0 {
            let mut back = delta.dot(&layers[l].0);
            // a_prev is the activated output of layer l-1
            match spec.activation {
                Activation::Tanh => back.zip_mut_with(a_prev, |d, &a| *d *= 1.0 - a * a),
                Activation::Relu => back.zip_mut_with(a_prev, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0
                    }
                }),
            }
            delta = back;
        }
    }
    Ok(ParamVector::new(grad))
}

/// Xavier-uniform weights, zero biases.
pub fn init_weights(spec: &MlpSpec, rng: &mut RngStream) -> ParamVector {
    let mut w = vec![0.0; spec.num_params()];
    for (start, n_in, n_out) in spec.layer_offsets() {
        let a = (6.0 / (n_in + n_out) as f64).sqrt();
        for x in &mut w[start..start + n_in * n_out] {
            *x = rng.uniform(-a, a);
        }
    }
    ParamVector::new(w)
}

/// Regression data labelled by a frozen random `teacher` network: inputs are
/// standard normal, targets are standardized per output to zero mean and
/// unit variance.
pub fn teacher_dataset(teacher: &MlpSpec, n: usize, rng: &mut RngStream) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Domain("dataset size must be at least 1".into()));
    }
    let spec = MlpSpec {
        loss: LossKind::Mse,
        ..teacher.clone()
    };
    spec.validate()?;
    let weights = init_weights(&spec, rng);
    let inputs = Array2::from_shape_fn((n, spec.input_dim()), |_| rng.standard_normal());
    let placeholder = Dataset::new(
        inputs.clone(),
        Targets::Regression(Array2::zeros((n, spec.output_dim()))),
    )?;
    let (_, cache) = mlp_forward(&spec, &weights, &placeholder)?;
    let mut out = cache.activations.last().unwrap().clone();
    for mut col in out.columns_mut() {
        let mean = col.mean().unwrap();
        let sd = col.mapv(|x| (x - mean).powi(2)).mean().unwrap().sqrt();
        let sd = if sd > 0.0 { sd } else { 1.0 };
        col.mapv_inplace(|x| (x - mean) / sd);
    }
    Dataset::new(inputs, Targets::Regression(out))
}

/// An MLP and its training set, usable as a full-batch [`Problem`] or for
/// mini-batch gradients.
#[derive(Debug, Clone)]
pub struct MlpProblem {
    pub spec: MlpSpec,
    pub data: Arc<Dataset>,
}

impl MlpProblem {
    pub fn new(spec: MlpSpec, data: Dataset) -> Result<Self> {
        spec.validate()?;
        check_batch(&spec, &ParamVector::zeros(spec.num_params()), &data)?;
        Ok(MlpProblem {
            spec,
            data: Arc::new(data),
        })
    }

    pub fn dim(&self) -> usize {
        self.spec.num_params()
    }

    pub fn loss_and_grad(&self, weights: &ParamVector, rows: Option<&[usize]>) -> Result<(f64, ParamVector)> {
        let batch;
        let data = match rows {
            Some(r) => {
                batch = self.data.subset(r);
                &batch
            }
            None => &*self.data,
        };
        let (loss, cache) = mlp_forward(&self.spec, weights, data)?;
        Ok((loss, mlp_backward(&self.spec, &cache)?))
    }

    /// Full-batch objective.
    pub fn to_problem(&self) -> Result<Problem> {
        let (a, b) = (self.clone(), self.clone());
        Problem::new(
            "mlp",
            self.dim(),
            move |w| mlp_forward(&a.spec, w, &a.data).map(|r| r.0).unwrap_or(f64::NAN),
            move |w| {
                b.loss_and_grad(w, None)
                    .map(|r| r.1)
                    .unwrap_or_else(|_| ParamVector::filled(w.len(), f64::NAN))
            },
            None,
        )
    }
}

#[cfg(test)]
fn rows(data: &Dataset, range: std::ops::Range<usize>) -> Dataset {
    Dataset {
        inputs: data.inputs.slice(ndarray::s![range.clone(), ..]).to_owned(),
        targets: match &data.targets {
            Targets::Regression(t) => Targets::Regression(t.slice(ndarray::s![range, ..]).to_owned()),
            Targets::Classes(c) => Targets::Classes(c[range].to_vec()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{derive_stream, finite_diff_grad};
    use ndarray::array;

    #[test]
    fn single_linear_layer_closed_form() {
        let spec = MlpSpec::new(vec![3, 2], Activation::Tanh, LossKind::Mse).unwrap();
        let w = ParamVector::new(vec![0.1, -0.2, 0.3, 0.4, 0.5, -0.6, 0.0, 0.0]);
        let x = array![[1.0, 2.0, -1.0]];
        let tau = array![[0.5, -0.5]];
        let data = Dataset::new(x.clone(), Targets::Regression(tau.clone())).unwrap();
        let (_, cache) = mlp_forward(&spec, &w, &data).unwrap();
        let g = mlp_backward(&spec, &cache).unwrap();
        let wm = array![[0.1, -0.2, 0.3], [0.4, 0.5, -0.6]];
        let r = wm.dot(&x.row(0)) - tau.row(0);
        for o in 0..2 {
            for i in 0..3 {
                assert!((g[o * 3 + i] - r[o] * x[[0, i]]).abs() < 1e-15);
            }
            assert!((g[6 + o] - r[o]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_network_zero_target() {
        let spec = MlpSpec::new(vec![4, 5, 3], Activation::Tanh, LossKind::Mse).unwrap();
        let w = ParamVector::zeros(spec.num_params());
        let mut rng = derive_stream(0, 0);
        let x = Array2::from_shape_fn((6, 4), |_| rng.standard_normal());
        let data = Dataset::new(x, Targets::Regression(Array2::zeros((6, 3)))).unwrap();
        let (loss, cache) = mlp_forward(&spec, &w, &data).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(mlp_backward(&spec, &cache).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn cross_entropy_matches_finite_differences() {
        let spec = MlpSpec::new(vec![3, 6, 4], Activation::Relu, LossKind::SoftmaxCrossEntropy).unwrap();
        let mut rng = derive_stream(9, 0);
        let w = init_weights(&spec, &mut rng);
        let x = Array2::from_shape_fn((7, 3), |_| rng.standard_normal());
        let labels = (0..7).map(|_| rng.index(4)).collect();
        let data = Dataset::new(x, Targets::Classes(labels)).unwrap();
        let (_, cache) = mlp_forward(&spec, &w, &data).unwrap();
        let g = mlp_backward(&spec, &cache).unwrap();
        let fd = finite_diff_grad(|p| mlp_forward(&spec, p, &data).unwrap().0, &w, 1e-5).unwrap();
        for (a, b) in g.iter().zip(fd.iter()) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn dimension_errors() {
        let spec = MlpSpec::new(vec![2, 3, 1], Activation::Tanh, LossKind::Mse).unwrap();
        let data = Dataset::new(Array2::zeros((2, 2)), Targets::Regression(Array2::zeros((2, 1)))).unwrap();
        let short = ParamVector::zeros(spec.num_params() - 1);
        assert!(matches!(mlp_forward(&spec, &short, &data), Err(Error::Shape { .. })));
        let wrong_in = Dataset::new(Array2::zeros((2, 5)), Targets::Regression(Array2::zeros((2, 1)))).unwrap();
        let w = ParamVector::zeros(spec.num_params());
        assert!(matches!(mlp_forward(&spec, &w, &wrong_in), Err(Error::Shape { .. })));
        let empty = rows(&data, 0..0);
        assert!(mlp_forward(&spec, &w, &empty).is_err());
        assert!(MlpSpec::new(vec![3], Activation::Tanh, LossKind::Mse).is_err());
    }

    #[test]
    fn teacher_targets_are_standardized() {
        let teacher = MlpSpec::new(vec![5, 8, 2], Activation::Tanh, LossKind::Mse).unwrap();
        let d = teacher_dataset(&teacher, 400, &mut derive_stream(2, 0)).unwrap();
        let Targets::Regression(t) = &d.targets else { unreachable!() };
        for col in t.columns() {
            assert!(col.mean().unwrap().abs() < 1e-12);
            assert!((col.mapv(|x| x * x).mean().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
