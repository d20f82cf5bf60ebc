use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub var_floor: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        NbParams { var_floor: 1e-9 }
    }
}

/// Gaussian naive Bayes: per-class feature means and variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &NbParams) -> Self {
        let p = x.n_cols();
        let mut count = vec![0usize; n_classes];
        let mut mean = vec![vec![0.0; p]; n_classes];
        for (row, &c) in x.rows().zip(y) {
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &n) in mean.iter_mut().zip(&count) {
            m.iter_mut().for_each(|v| *v /= n.max(1) as f64);
        }
        let mut var = vec![vec![0.0; p]; n_classes];
        for (row, &c) in x.rows().zip(y) {
            for ((s, v), m) in var[c].iter_mut().zip(row).zip(&mean[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &n) in var.iter_mut().zip(&count) {
            s.iter_mut()
                .for_each(|v| *v = (*v / n.max(1) as f64).max(params.var_floor));
        }
        let n = y.len() as f64;
        GaussianNb {
            log_prior: count.iter().map(|&c| (c as f64 / n).ln()).collect(),
            mean,
            var,
        }
    }

    pub fn joint_log_likelihood(&self, row: &[f64]) -> Vec<f64> {
        self.log_prior
            .iter()
            .enumerate()
            .map(|(c, lp)| {
                lp + row
                    .iter()
                    .zip(&self.mean[c])
                    .zip(&self.var[c])
                    .map(|((x, m), v)| {
                        -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v)
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        super::softmax(&self.joint_log_likelihood(row))
    }
}
