//! Bagged tree ensembles: plain bagging, random forests and extra trees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{argmax, build_cart_tree, DecisionTree, FeatureSubsample, SplitMode, TreeParams};
use super::ClassifyError;
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl ForestParams {
    pub fn bagging() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams::default(),
        }
    }

    pub fn random_forest() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams {
                feature_subsample: FeatureSubsample::Sqrt,
                ..TreeParams::default()
            },
        }
    }

    pub fn extra_trees() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: false,
            tree: TreeParams {
                feature_subsample: FeatureSubsample::Sqrt,
                split_mode: SplitMode::RandomThreshold,
                ..TreeParams::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    n_classes: usize,
}

fn grow_one(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
    seed: u64,
    t: usize,
) -> Result<DecisionTree, ClassifyError> {
    let n = x.n_rows();
    let tree_seed = derive_seed(seed, t as u64);
    let weights = if params.bootstrap {
        let mut rng = rng_for(tree_seed, 1);
        let mut w = vec![0.0; n];
        for _ in 0..n {
            w[rng.random_range(0..n)] += 1.0;
        }
        w
    } else {
        vec![1.0; n]
    };
    build_cart_tree(x, y, &weights, n_classes, &params.tree, derive_seed(tree_seed, 2))
}

impl Forest {
    /// Per-tree seeds are derived from `(seed, tree index)`, so the parallel
    /// and sequential paths produce identical forests.
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
        parallel: bool,
    ) -> Result<Self, ClassifyError> {
        if params.n_trees == 0 {
            return Err(ClassifyError::InvalidHyperparameter("n_trees must be >= 1".into()));
        }
        let trees = if parallel {
            (0..params.n_trees)
                .into_par_iter()
                .map(|t| grow_one(x, y, n_classes, params, seed, t))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            (0..params.n_trees)
                .map(|t| grow_one(x, y, n_classes, params, seed, t))
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Forest { trees, n_classes })
    }

    /// Fraction of trees voting for each class.
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[argmax(t.predict_row(row))] += 1.0;
        }
        let b = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= b);
        votes
    }

    /// Mean impurity decrease per feature over trees, normalized to sum 1.
    /// Falls back to uniform when no tree split at all.
    pub fn feature_importance(&self) -> Vec<f64> {
        let p = self.trees.first().map(|t| t.n_features).unwrap_or(0);
        let mut total = vec![0.0; p];
        for t in &self.trees {
            for (s, g) in total.iter_mut().zip(t.impurity_decrease()) {
                *s += g;
            }
        }
        let b = self.trees.len() as f64;
        total.iter_mut().for_each(|v| *v /= b);
        let sum: f64 = total.iter().sum();
        if sum > 0.0 {
            total.iter_mut().for_each(|v| *v /= sum);
        } else if p > 0 {
            total.iter_mut().for_each(|v| *v = 1.0 / p as f64);
        }
        total
    }
}
