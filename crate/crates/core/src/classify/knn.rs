use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Majority vote among the `k` nearest training rows (Euclidean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    n_classes: usize,
    x: Matrix,
    y: Vec<usize>,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &KnnParams) -> Self {
        Knn {
            k: params.k,
            n_classes,
            x: x.clone(),
            y: y.to_vec(),
        }
    }

    /// Vote fractions. Distance ties keep the lower training index.
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .rows()
            .enumerate()
            .map(|(i, r)| {
                let s: f64 = r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        let k = self.k.min(d.len());
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0.0; self.n_classes];
        for &(_, i) in &d[..k] {
            votes[self.y[i]] += 1.0;
        }
        votes.iter_mut().for_each(|v| *v /= k as f64);
        votes
    }
}
