use serde::{Deserialize, Serialize};

use super::EvalError;

/// `counts[i][j]`: rows of true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(c: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; c]; c],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// One-vs-rest `(tp, fp, fn, tn)` for class `c`.
    pub fn one_vs_rest(&self, c: usize) -> (u64, u64, u64, u64) {
        let tp = self.counts[c][c];
        let fp: u64 = (0..self.n_classes()).map(|i| self.counts[i][c]).sum::<u64>() - tp;
        let fn_: u64 = self.counts[c].iter().sum::<u64>() - tp;
        (tp, fp, fn_, self.total() - tp - fp - fn_)
    }
}

pub fn confusion_matrix(
    truth: &[usize],
    pred: &[usize],
    c: usize,
) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch(truth.len(), pred.len()));
    }
    let mut cm = ConfusionMatrix::zeros(c);
    for (&t, &p) in truth.iter().zip(pred) {
        if t >= c || p >= c {
            return Err(EvalError::LabelOutOfRange(t.max(p), c));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Macro one-vs-rest precision and recall (0/0 counts as 0) and accuracy.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let total = cm.total();
    if total == 0 || cm.n_classes() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let c = cm.n_classes();
    let (mut pr, mut re, mut diag) = (0.0, 0.0, 0);
    for k in 0..c {
        let (tp, fp, fn_, _) = cm.one_vs_rest(k);
        pr += ratio(tp, tp + fp);
        re += ratio(tp, tp + fn_);
        diag += tp;
    }
    Ok(Metrics {
        precision: pr / c as f64,
        recall: re / c as f64,
        accuracy: ratio(diag, total),
    })
}
