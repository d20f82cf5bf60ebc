//! One-hidden-layer perceptron (ReLU) with a softmax output, trained by
//! mini-batch gradient descent with momentum on mean cross-entropy.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub momentum: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 64,
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 32,
            momentum: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    n_in: usize,
    hidden: usize,
    n_out: usize,
    /// `[W1 (hidden x n_in), b1, W2 (n_out x hidden), b2]`, row-major.
    weights: Vec<f64>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn init(n_in: usize, hidden: usize, n_out: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, 0);
        let mut weights = vec![0.0; hidden * n_in + hidden + n_out * hidden + n_out];
        let l1 = (6.0 / (n_in + hidden) as f64).sqrt();
        for w in &mut weights[..hidden * n_in] {
            *w = rng.random_range(-l1..l1);
        }
        let off = hidden * n_in + hidden;
        let l2 = (6.0 / (hidden + n_out) as f64).sqrt();
        for w in &mut weights[off..off + n_out * hidden] {
            *w = rng.random_range(-l2..l2);
        }
        Mlp {
            n_in,
            hidden,
            n_out,
            weights,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.n_in;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.n_out * self.hidden;
        (b1, w2, b2)
    }

    /// Returns (hidden pre-activations, output probabilities).
    fn forward(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (b1, w2, b2) = self.offsets();
        let w = &self.weights;
        let z1: Vec<f64> = (0..self.hidden)
            .map(|h| {
                let wr = &w[h * self.n_in..(h + 1) * self.n_in];
                w[b1 + h] + wr.iter().zip(row).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        let z2: Vec<f64> = (0..self.n_out)
            .map(|o| {
                let wr = &w[w2 + o * self.hidden..w2 + (o + 1) * self.hidden];
                w[b2 + o]
                    + wr
                        .iter()
                        .zip(&z1)
                        .map(|(a, z)| a * z.max(0.0))
                        .sum::<f64>()
            })
            .collect();
        (z1, super::softmax(&z2))
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        self.forward(row).1
    }

    /// Mean cross-entropy over `rows` and its gradient with respect to the weights.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[usize], rows: &[usize]) -> (f64, Vec<f64>) {
        let (b1, w2, b2) = self.offsets();
        let mut grad = vec![0.0; self.weights.len()];
        let mut loss = 0.0;
        for &i in rows {
            let row = x.row(i);
            let (z1, p) = self.forward(row);
            loss -= p[y[i]].max(1e-300).ln();
            let mut dz2 = p;
            dz2[y[i]] -= 1.0;
            for (o, &d) in dz2.iter().enumerate() {
                grad[b2 + o] += d;
                for (h, z) in z1.iter().enumerate() {
                    grad[w2 + o * self.hidden + h] += d * z.max(0.0);
                }
            }
            for (h, z) in z1.iter().enumerate() {
                if *z <= 0.0 {
                    continue;
                }
                let da: f64 = (0..self.n_out)
                    .map(|o| self.weights[w2 + o * self.hidden + h] * dz2[o])
                    .sum();
                grad[b1 + h] += da;
                for (j, v) in row.iter().enumerate() {
                    grad[h * self.n_in + j] += da * v;
                }
            }
        }
        let n = rows.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }

    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &MlpParams, seed: u64) -> Self {
        let mut net = Mlp::init(x.n_cols(), params.hidden, n_classes, seed);
        let mut rng = rng_for(seed, 1);
        let mut order: Vec<usize> = (0..x.n_rows()).collect();
        let mut velocity = vec![0.0; net.weights.len()];
        let batch = params.batch_size.max(1);
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                let (_, g) = net.loss_and_gradient(x, y, chunk);
                for ((w, v), g) in net.weights.iter_mut().zip(&mut velocity).zip(&g) {
                    *v = params.momentum * *v - params.learning_rate * g;
                    *w += *v;
                }
            }
        }
        net
    }
}
