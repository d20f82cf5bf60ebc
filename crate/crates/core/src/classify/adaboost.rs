//! Multi-class AdaBoost (SAMME) over depth-1 stumps.

use serde::{Deserialize, Serialize};

use super::tree::{build_cart_tree, DecisionTree, TreeParams};
use super::ClassifyError;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub n_rounds: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams { n_rounds: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<DecisionTree>,
    pub alphas: Vec<f64>,
    n_classes: usize,
    /// Sum of the sample weights after each accepted round's renormalization.
    pub weight_sums: Vec<f64>,
}

impl AdaBoost {
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        params: &AdaBoostParams,
        seed: u64,
    ) -> Result<Self, ClassifyError> {
        if params.n_rounds == 0 {
            return Err(ClassifyError::InvalidHyperparameter("n_rounds must be >= 1".into()));
        }
        let n = x.n_rows();
        let mut w = vec![1.0 / n as f64; n];
        let reject_at = 1.0 - 1.0 / n_classes as f64;
        let mut model = AdaBoost {
            stumps: Vec::new(),
            alphas: Vec::new(),
            n_classes,
            weight_sums: Vec::new(),
        };
        for round in 0..params.n_rounds {
            let stump = build_cart_tree(x, y, &w, n_classes, &TreeParams::stump(), seed)?;
            let miss: Vec<bool> = (0..n).map(|i| stump.predict_class(x.row(i)) != y[i]).collect();
            let total: f64 = w.iter().sum();
            let err: f64 = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(w, _)| w).sum::<f64>() / total;
            if err >= reject_at {
                if round == 0 {
                    // Nothing better than chance: keep the stump as a plain classifier.
                    model.stumps.push(stump);
                    model.alphas.push(1.0);
                }
                break;
            }
            if err <= 0.0 {
                model.stumps.push(stump);
                model.alphas.push(1.0);
                break;
            }
            let alpha = ((1.0 - err) / err).ln() + (n_classes as f64 - 1.0).ln();
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            model.weight_sums.push(w.iter().sum());
            model.stumps.push(stump);
            model.alphas.push(alpha);
        }
        Ok(model)
    }

    /// Alpha-weighted stump votes, normalized to a distribution.
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        let mut score = vec![0.0; self.n_classes];
        for (s, a) in self.stumps.iter().zip(&self.alphas) {
            score[s.predict_class(row)] += a;
        }
        let total: f64 = score.iter().sum();
        score.iter_mut().for_each(|v| *v /= total);
        score
    }
}
