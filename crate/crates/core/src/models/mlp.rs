//! Fully connected network: ReLU hidden layers, one linear output, MSE loss.
//!
//! Trained by mini-batch gradient descent with classical momentum. Weights are
//! Glorot-uniform initialized, biases start at zero. Training stops early once
//! the monitored MAE has not improved by `min_delta` for `patience` epochs,
//! and the best weights seen are kept.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::MlpParams;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Dense layer; `weights` is row-major `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    fn forward(&self, input: &[f64], out: &mut [f64]) {
        for (o, (w_row, b)) in out
            .iter_mut()
            .zip(self.weights.chunks_exact(self.in_dim).zip(&self.biases))
        {
            *o = b + w_row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Gradient of the loss with respect to every weight and bias, laid out like
/// the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpGradient {
    fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Flattened in the same order as [`Mlp::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs: usize,
    /// Training-set MSE of the returned weights.
    pub final_loss: f64,
}

impl Mlp {
    /// `sizes` lists every layer width including input and output.
    pub fn zeros(sizes: &[usize]) -> Self {
        Self {
            layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn glorot(sizes: &[usize], rng: &mut impl Rng) -> Self {
        let mut net = Self::zeros(sizes);
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.in_dim + layer.out_dim) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..=limit);
            }
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.out_dim));
        s
    }

    pub fn n_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// All weights and biases, layer by layer (weights then biases).
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.n_parameters(), "parameter count");
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = it.next().expect("length checked above");
            }
        }
    }

    /// Pre-activations of every layer for one input.
    fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.out_dim];
            layer.forward(&act, &mut z);
            act = if i + 1 < self.layers.len() {
                z.iter().map(|&v| v.max(0.0)).collect()
            } else {
                z.clone()
            };
            pre.push(z);
        }
        pre
    }

    pub fn predict_row(&self, input: &[f64]) -> f64 {
        let mut act = input.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.out_dim];
            layer.forward(&act, &mut z);
            if i < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            act = z;
        }
        act[0]
    }

    /// Mean squared error over the batch.
    pub fn loss(&self, x: &Matrix, y: &[f64]) -> f64 {
        x.rows()
            .zip(y)
            .map(|(r, t)| (self.predict_row(r) - t).powi(2))
            .sum::<f64>()
            / y.len() as f64
    }

    /// MSE and its exact gradient by backpropagation.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64]) -> Result<(f64, MlpGradient)> {
        x.ensure_width(self.input_dim())?;
        if x.nrows() != y.len() {
            return Err(Error::Shape {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.nrows() == 0 {
            return Err(Error::Empty("batch"));
        }
        if x.as_slice().iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mlp batch"));
        }
        let rows: Vec<usize> = (0..x.nrows()).collect();
        let mut grad = MlpGradient::zeros_like(self);
        let loss = self.accumulate_gradient(x, y, &rows, &mut grad);
        Ok((loss, grad))
    }

    /// Adds the MSE gradient over `rows` into `grad` and returns the loss.
    fn accumulate_gradient(
        &self,
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        grad: &mut MlpGradient,
    ) -> f64 {
        let scale = 2.0 / rows.len() as f64;
        let last = self.layers.len() - 1;
        let mut loss = 0.0;
        for &r in rows {
            let input = x.row(r);
            let pre = self.forward_trace(input);
            let err = pre[last][0] - y[r];
            loss += err * err;

            let mut delta = vec![err * scale];
            for l in (0..self.layers.len()).rev() {
                let layer = &self.layers[l];
                let act_in: Vec<f64> = if l == 0 {
                    input.to_vec()
                } else {
                    pre[l - 1].iter().map(|&v| v.max(0.0)).collect()
                };
                let gw = &mut grad.weights[l];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (g, a) in row.iter_mut().zip(&act_in) {
                        *g += d * a;
                    }
                    grad.biases[l][o] += d;
                }
                if l > 0 {
                    let mut prev = vec![0.0; layer.in_dim];
                    for (o, &d) in delta.iter().enumerate() {
                        let w_row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (p, w) in prev.iter_mut().zip(w_row) {
                            *p += w * d;
                        }
                    }
                    for (p, z) in prev.iter_mut().zip(&pre[l - 1]) {
                        if *z <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        loss / rows.len() as f64
    }

    fn mae(&self, x: &Matrix, y: &[f64]) -> f64 {
        x.rows()
            .zip(y)
            .map(|(r, t)| (self.predict_row(r) - t).abs())
            .sum::<f64>()
            / y.len() as f64
    }

    /// Trains a fresh network. Early stopping watches validation MAE when a
    /// validation set is supplied, training MAE otherwise.
    pub fn train(
        params: &MlpParams,
        x: &Matrix,
        y: &[f64],
        validation: Option<(&Matrix, &[f64])>,
        seed: u64,
    ) -> Result<(Self, TrainingMeta)> {
        if x.nrows() == 0 {
            return Err(Error::Empty("training rows"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![x.ncols()];
        sizes.extend(&params.hidden);
        sizes.push(1);
        let mut net = Self::glorot(&sizes, &mut rng);

        let mut velocity = MlpGradient::zeros_like(&net);
        let mut grad = MlpGradient::zeros_like(&net);
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        let (mon_x, mon_y) = validation.unwrap_or((x, y));

        let mut best = net.clone();
        let mut best_mae = net.mae(mon_x, mon_y);
        let mut stale = 0;
        let mut epochs = 0;
        for epoch in 1..=params.max_epochs {
            epochs = epoch;
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(params.batch_size) {
                grad.weights.iter_mut().flatten().for_each(|g| *g = 0.0);
                grad.biases.iter_mut().flatten().for_each(|g| *g = 0.0);
                epoch_loss += net.accumulate_gradient(x, y, batch, &mut grad) * batch.len() as f64;
                for (l, layer) in net.layers.iter_mut().enumerate() {
                    let params_and_grads = layer
                        .weights
                        .iter_mut()
                        .zip(velocity.weights[l].iter_mut().zip(&grad.weights[l]))
                        .chain(
                            layer
                                .biases
                                .iter_mut()
                                .zip(velocity.biases[l].iter_mut().zip(&grad.biases[l])),
                        );
                    for (w, (v, g)) in params_and_grads {
                        *v = params.momentum * *v - params.learning_rate * g;
                        *w += *v;
                    }
                }
            }
            if !epoch_loss.is_finite() {
                return Err(Error::TrainingDiverged { epochs: epoch });
            }
            let mae = net.mae(mon_x, mon_y);
            if !mae.is_finite() {
                return Err(Error::TrainingDiverged { epochs: epoch });
            }
            if mae < best_mae - params.min_delta {
                best_mae = mae;
                best = net.clone();
                stale = 0;
            } else {
                stale += 1;
                if stale >= params.patience {
                    break;
                }
            }
        }
        let final_loss = best.loss(x, y);
        Ok((
            best,
            TrainingMeta {
                epochs,
                final_loss,
            },
        ))
    }
}
