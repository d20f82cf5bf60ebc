//! Weighted-Gini classification trees and squared-error regression trees.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::matrix::Matrix;
use crate::rng::rng_for;

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    All,
    Sqrt,
    Count(usize),
}

impl FeatureSubsample {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            FeatureSubsample::All => p,
            FeatureSubsample::Sqrt => ((p as f64).sqrt().floor() as usize).clamp(1, p.max(1)),
            FeatureSubsample::Count(m) => m.clamp(1, p.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Exhaustive scan of midpoints between consecutive distinct values.
    Best,
    /// One uniform threshold per candidate feature within its node range.
    RandomThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub feature_subsample: FeatureSubsample,
    pub split_mode: SplitMode,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            feature_subsample: FeatureSubsample::All,
            split_mode: SplitMode::Best,
        }
    }
}

impl TreeParams {
    pub fn stump() -> Self {
        TreeParams {
            max_depth: Some(1),
            ..TreeParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Impurity decrease weighted by the node's share of the root weight.
        gain: f64,
    },
    Leaf {
        value: Vec<f64>,
    },
}

/// Binary tree over rows; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub depth: usize,
}

impl DecisionTree {
    /// Index into `nodes` of the leaf reached by `row`.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    fn leaf_for(&self, row: &[f64]) -> &[f64] {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Leaf class distribution (classification) or leaf value (regression).
    pub fn predict_row(&self, row: &[f64]) -> &[f64] {
        self.leaf_for(row)
    }

    /// Argmax of the leaf distribution, ties to the lowest class.
    pub fn predict_class(&self, row: &[f64]) -> usize {
        argmax(self.leaf_for(row))
    }

    /// Total weighted impurity decrease per feature (unnormalized).
    pub fn impurity_decrease(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_features];
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                out[*feature] += gain;
            }
        }
        out
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// Target of a tree build: class labels with weights, or real residuals.
enum Target<'a> {
    Classes {
        y: &'a [usize],
        weights: &'a [f64],
        n_classes: usize,
    },
    Regression {
        r: &'a [f64],
    },
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Lower is better: weighted child impurity, or negative explained sum of squares.
    score: f64,
}

struct Builder<'a> {
    x: &'a Matrix,
    target: Target<'a>,
    params: &'a TreeParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    depth: usize,
    root_weight: f64,
}

impl<'a> Builder<'a> {
    fn node_stats(&self, idx: &[usize]) -> (f64, f64, Vec<f64>) {
        match &self.target {
            Target::Classes {
                y,
                weights,
                n_classes,
            } => {
                let mut counts = vec![0.0; *n_classes];
                for &i in idx {
                    counts[y[i]] += weights[i];
                }
                let w: f64 = counts.iter().sum();
                let imp = gini(&counts, w);
                let dist = counts.iter().map(|c| c / w).collect();
                (w, imp, dist)
            }
            Target::Regression { r } => {
                let n = idx.len() as f64;
                let mean = idx.iter().map(|&i| r[i]).sum::<f64>() / n;
                let var = idx.iter().map(|&i| (r[i] - mean).powi(2)).sum::<f64>() / n;
                (n, var, vec![mean])
            }
        }
    }

    fn score_split(&self, idx: &[usize], feature: usize, threshold: f64) -> Option<f64> {
        let min_leaf = self.params.min_samples_leaf.max(1);
        let (mut nl, mut nr) = (0usize, 0usize);
        match &self.target {
            Target::Classes {
                y,
                weights,
                n_classes,
            } => {
                let mut left = vec![0.0; *n_classes];
                let mut right = vec![0.0; *n_classes];
                for &i in idx {
                    if self.x.get(i, feature) <= threshold {
                        left[y[i]] += weights[i];
                        nl += 1;
                    } else {
                        right[y[i]] += weights[i];
                        nr += 1;
                    }
                }
                if nl < min_leaf || nr < min_leaf {
                    return None;
                }
                let wl: f64 = left.iter().sum();
                let wr: f64 = right.iter().sum();
                Some(wl * gini(&left, wl) + wr * gini(&right, wr))
            }
            Target::Regression { r } => {
                let (mut sl, mut sr) = (0.0, 0.0);
                for &i in idx {
                    if self.x.get(i, feature) <= threshold {
                        sl += r[i];
                        nl += 1;
                    } else {
                        sr += r[i];
                        nr += 1;
                    }
                }
                if nl < min_leaf || nr < min_leaf {
                    return None;
                }
                Some(-(sl * sl / nl as f64 + sr * sr / nr as f64))
            }
        }
    }

    /// Sorted scan over all midpoints of one feature.
    fn best_threshold(&self, idx: &[usize], feature: usize) -> Option<Candidate> {
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| {
            self.x
                .get(a, feature)
                .total_cmp(&self.x.get(b, feature))
                .then(a.cmp(&b))
        });
        let n = order.len();
        let mut best: Option<Candidate> = None;
        match &self.target {
            Target::Classes {
                y,
                weights,
                n_classes,
            } => {
                let mut right = vec![0.0; *n_classes];
                for &i in &order {
                    right[y[i]] += weights[i];
                }
                let mut left = vec![0.0; *n_classes];
                for pos in 0..n - 1 {
                    let i = order[pos];
                    left[y[i]] += weights[i];
                    right[y[i]] -= weights[i];
                    let (v, next) = (self.x.get(i, feature), self.x.get(order[pos + 1], feature));
                    if v == next || pos + 1 < min_leaf || n - pos - 1 < min_leaf {
                        continue;
                    }
                    let wl: f64 = left.iter().sum();
                    let wr: f64 = right.iter().map(|c: &f64| c.max(0.0)).sum();
                    let score = wl * gini(&left, wl) + wr * gini(&right, wr);
                    if best.as_ref().is_none_or(|b| score < b.score) {
                        best = Some(Candidate {
                            feature,
                            threshold: midpoint(v, next),
                            score,
                        });
                    }
                }
            }
            Target::Regression { r } => {
                let total: f64 = order.iter().map(|&i| r[i]).sum();
                let mut sl = 0.0;
                for pos in 0..n - 1 {
                    let i = order[pos];
                    sl += r[i];
                    let (v, next) = (self.x.get(i, feature), self.x.get(order[pos + 1], feature));
                    if v == next || pos + 1 < min_leaf || n - pos - 1 < min_leaf {
                        continue;
                    }
                    let (nl, nr) = ((pos + 1) as f64, (n - pos - 1) as f64);
                    let sr = total - sl;
                    let score = -(sl * sl / nl + sr * sr / nr);
                    if best.as_ref().is_none_or(|b| score < b.score) {
                        best = Some(Candidate {
                            feature,
                            threshold: midpoint(v, next),
                            score,
                        });
                    }
                }
            }
        }
        best
    }

    fn random_threshold(&mut self, idx: &[usize], feature: usize) -> Option<Candidate> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in idx {
            let v = self.x.get(i, feature);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(lo < hi) {
            return None;
        }
        let threshold = self.rng.random_range(lo..hi);
        let score = self.score_split(idx, feature, threshold)?;
        Some(Candidate {
            feature,
            threshold,
            score,
        })
    }

    fn find_split(&mut self, idx: &[usize]) -> Option<Candidate> {
        let p = self.x.n_cols();
        let m = self.params.feature_subsample.resolve(p);
        let mut features: Vec<usize> = (0..p).collect();
        if m < p {
            // Partial Fisher-Yates: the first m entries are the sampled features.
            for i in 0..p - 1 {
                let j = self.rng.random_range(i..p);
                features.swap(i, j);
            }
        }
        let mut start = 0;
        while start < p {
            let end = (start + m).min(p);
            let mut batch = features[start..end].to_vec();
            batch.sort_unstable();
            let mut best: Option<Candidate> = None;
            for f in batch {
                let cand = match self.params.split_mode {
                    SplitMode::Best => self.best_threshold(idx, f),
                    SplitMode::RandomThreshold => self.random_threshold(idx, f),
                };
                if let Some(c) = cand {
                    if best.as_ref().is_none_or(|b| c.score < b.score) {
                        best = Some(c);
                    }
                }
            }
            if best.is_some() {
                return best;
            }
            // No valid split among the sampled features; draw the next batch.
            start = end;
        }
        None
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        self.depth = self.depth.max(depth);
        let (w, impurity, value) = self.node_stats(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: value.clone(),
        });
        let at_cap = self.params.max_depth.is_some_and(|d| depth >= d);
        if impurity <= 1e-15
            || at_cap
            || idx.len() < 2 * self.params.min_samples_leaf.max(1)
        {
            return id;
        }
        let Some(split) = self.find_split(&idx) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        let child_impurity = match &self.target {
            Target::Classes { .. } => split.score,
            Target::Regression { r } => {
                let sse = |ix: &[usize]| {
                    let n = ix.len() as f64;
                    let m = ix.iter().map(|&i| r[i]).sum::<f64>() / n;
                    ix.iter().map(|&i| (r[i] - m).powi(2)).sum::<f64>()
                };
                sse(&left_idx) + sse(&right_idx)
            }
        };
        let gain = ((w * impurity - child_impurity) / self.root_weight).max(0.0);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            gain,
        };
        id
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // Guard against rounding up onto `b` for adjacent floats.
    if m >= b {
        a
    } else {
        m
    }
}

/// Grow a weighted-Gini classification tree. Rows with zero weight are ignored.
pub fn build_cart_tree(
    x: &Matrix,
    y: &[usize],
    weights: &[f64],
    n_classes: usize,
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree, ClassifyError> {
    if x.n_rows() == 0 || y.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    if y.len() != x.n_rows() || weights.len() != x.n_rows() {
        return Err(ClassifyError::LengthMismatch(y.len(), x.n_rows()));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(ClassifyError::InvalidHyperparameter(
            "sample weights must be finite and nonnegative".into(),
        ));
    }
    let idx: Vec<usize> = (0..x.n_rows()).filter(|&i| weights[i] > 0.0).collect();
    if idx.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    let root_weight: f64 = idx.iter().map(|&i| weights[i]).sum();
    let mut b = Builder {
        x,
        target: Target::Classes {
            y,
            weights,
            n_classes,
        },
        params,
        rng: rng_for(seed, 0),
        nodes: Vec::new(),
        depth: 0,
        root_weight,
    };
    b.grow(idx, 0);
    Ok(DecisionTree {
        nodes: b.nodes,
        n_features: x.n_cols(),
        depth: b.depth,
    })
}

/// Grow a least-squares regression tree on `rows` of `x`; leaves hold the mean target.
pub fn build_regression_tree(
    x: &Matrix,
    target: &[f64],
    rows: &[usize],
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree, ClassifyError> {
    if rows.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    let mut b = Builder {
        x,
        target: Target::Regression { r: target },
        params,
        rng: rng_for(seed, 0),
        nodes: Vec::new(),
        depth: 0,
        root_weight: rows.len() as f64,
    };
    b.grow(rows.to_vec(), 0);
    Ok(DecisionTree {
        nodes: b.nodes,
        n_features: x.n_cols(),
        depth: b.depth,
    })
}
