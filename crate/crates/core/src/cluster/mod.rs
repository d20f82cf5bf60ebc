//! Gower dissimilarity, PAM k-medoids, k-means, cluster validation and
//! the mapping from clusters to quality categories.

mod categories;
mod gower;
mod kmeans;
mod pam;
mod validation;

pub use categories::{
    assign_categories, rank_clusters, read_assignment_csv, write_assignment_csv, Category,
    CategoryMap, DEFAULT_QUALITY_FEATURES,
};
pub use gower::{gower_distance, gower_distance_weighted, gower_matrix, GowerKind, GowerOptions};
pub use kmeans::k_means;
pub use pam::{k_medoids, swap_delta, KMedoidsParams, PamInit};
pub use validation::{adjusted_rand_index, silhouette_samples, silhouette_width};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("rows have different arity ({0} vs {1})")]
    ArityMismatch(usize, usize),
    #[error("k = {k} exceeds the number of rows {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("silhouette needs at least two clusters")]
    SingleCluster,
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least two labelled points are required")]
    TooFewPoints,
    #[error("unknown feature \"{0}\"")]
    UnknownFeature(String),
    #[error("category assignment needs exactly 3 clusters, got {0}")]
    NotThreeClusters(usize),
    #[error("weights must be nonnegative with a positive sum")]
    InvalidWeights,
    #[error("assignment csv: {0}")]
    Csv(String),
}

/// Symmetric n x n dissimilarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Build from a full square buffer; panics on a non-square length.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "distance matrix must be square");
        DistanceMatrix { n, data }
    }

    /// Fill the upper triangle from `f` and mirror it.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DistanceMatrix { n, data }
    }

    /// Euclidean distances between 1-D points; handy for fixtures.
    pub fn from_points_1d(points: &[f64]) -> Self {
        DistanceMatrix::from_fn(points.len(), |i, j| (points[i] - points[j]).abs())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Mean and maximum off-diagonal entry.
    pub fn summary(&self) -> (f64, f64) {
        if self.n < 2 {
            return (0.0, 0.0);
        }
        let mut sum = 0.0;
        let mut max = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.get(i, j);
                sum += v;
                max = max.max(v);
            }
        }
        (sum / (self.n * (self.n - 1) / 2) as f64, max)
    }
}

/// Cluster centres: data-point medoids or free centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Centers {
    Medoids(Vec<usize>),
    Centroids(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub centers: Centers,
    /// Sum over rows of the distance (squared Euclidean for k-means) to the row's centre.
    pub total_cost: f64,
    /// Cost after each accepted improvement step, starting with the initial configuration.
    pub cost_history: Vec<f64>,
    pub iterations: usize,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        match &self.centers {
            Centers::Medoids(m) => m.len(),
            Centers::Centroids(c) => c.len(),
        }
    }

    pub fn medoids(&self) -> Option<&[usize]> {
        match &self.centers {
            Centers::Medoids(m) => Some(m),
            Centers::Centroids(_) => None,
        }
    }
}
