//! Softmax gradient boosting with depth-limited regression trees.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::tree::{build_regression_tree, DecisionTree, Node, TreeParams};
use super::{softmax, ClassifyError};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Fraction of rows drawn (without replacement) for each round's trees.
    pub subsample: f64,
}

impl Default for GbmParams {
    fn default() -> Self {
        GbmParams {
            n_rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            subsample: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmRound {
    /// One tree per class.
    pub trees: Vec<DecisionTree>,
    /// Effective step: learning rate times any backtracking factor.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbm {
    pub init: Vec<f64>,
    pub rounds: Vec<GbmRound>,
    /// Training log-loss before any round, then after each round.
    pub loss_trace: Vec<f64>,
}

const MAX_HALVINGS: usize = 20;

fn log_loss(scores: &[Vec<f64>], y: &[usize]) -> f64 {
    let mut s = 0.0;
    for (f, &c) in scores.iter().zip(y) {
        let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + f.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        s += lse - f[c];
    }
    s / y.len() as f64
}

impl Gbm {
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        params: &GbmParams,
        seed: u64,
    ) -> Result<Self, ClassifyError> {
        if !(params.subsample > 0.0 && params.subsample <= 1.0) {
            return Err(ClassifyError::InvalidHyperparameter(
                "subsample must be in (0, 1]".into(),
            ));
        }
        if !(params.learning_rate >= 0.0) {
            return Err(ClassifyError::InvalidHyperparameter(
                "learning_rate must be >= 0".into(),
            ));
        }
        let n = x.n_rows();
        let k = n_classes;
        let mut counts = vec![0.0; k];
        for &c in y {
            counts[c] += 1.0;
        }
        // Log priors; an absent class gets a large negative score instead of -inf.
        let init: Vec<f64> = counts
            .iter()
            .map(|&c| if c > 0.0 { (c / n as f64).ln() } else { -30.0 })
            .collect();
        let mut scores: Vec<Vec<f64>> = vec![init.clone(); n];
        let mut loss = log_loss(&scores, y);
        let mut model = Gbm {
            init,
            rounds: Vec::new(),
            loss_trace: vec![loss],
        };
        let tree_params = TreeParams {
            max_depth: Some(params.max_depth),
            ..TreeParams::default()
        };
        let m = ((params.subsample * n as f64).round() as usize).clamp(1, n);
        let kf = k as f64;
        for round in 0..params.n_rounds {
            let rows: Vec<usize> = if m == n {
                (0..n).collect()
            } else {
                let mut rng = rng_for(seed, round as u64);
                let mut r = sample(&mut rng, n, m).into_vec();
                r.sort_unstable();
                r
            };
            let probs: Vec<Vec<f64>> = scores.iter().map(|f| softmax(f)).collect();
            let mut trees = Vec::with_capacity(k);
            for c in 0..k {
                let resid: Vec<f64> = (0..n)
                    .map(|i| if y[i] == c { 1.0 } else { 0.0 } - probs[i][c])
                    .collect();
                let round_seed = derive_seed(derive_seed(seed, round as u64), c as u64 + 1);
                let mut tree = build_regression_tree(x, &resid, &rows, &tree_params, round_seed)?;
                // Replace leaf means with a one-step Newton estimate.
                let mut num = vec![0.0; tree.nodes.len()];
                let mut den = vec![0.0; tree.nodes.len()];
                for &i in &rows {
                    let l = tree.leaf_index(x.row(i));
                    let r = resid[i];
                    num[l] += r;
                    den[l] += r.abs() * (1.0 - r.abs());
                }
                for (j, node) in tree.nodes.iter_mut().enumerate() {
                    if let Node::Leaf { value } = node {
                        let g = if den[j] > 1e-12 {
                            (kf - 1.0) / kf * num[j] / den[j]
                        } else {
                            0.0
                        };
                        *value = vec![g];
                    }
                }
                trees.push(tree);
            }
            let deltas: Vec<Vec<f64>> = (0..n)
                .map(|i| trees.iter().map(|t| t.predict_row(x.row(i))[0]).collect())
                .collect();
            let mut step = params.learning_rate;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let cand: Vec<Vec<f64>> = scores
                    .iter()
                    .zip(&deltas)
                    .map(|(f, d)| f.iter().zip(d).map(|(a, b)| a + step * b).collect())
                    .collect();
                let l = log_loss(&cand, y);
                if l <= loss {
                    accepted = Some((cand, l));
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some((cand, l)) => {
                    scores = cand;
                    loss = l;
                    model.rounds.push(GbmRound { trees, step });
                }
                None => {}
            }
            model.loss_trace.push(loss);
        }
        Ok(model)
    }

    pub fn decision_row(&self, row: &[f64]) -> Vec<f64> {
        let mut f = self.init.clone();
        for r in &self.rounds {
            for (fc, t) in f.iter_mut().zip(&r.trees) {
                *fc += r.step * t.predict_row(row)[0];
            }
        }
        f
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        softmax(&self.decision_row(row))
    }
}
