use rayon::prelude::*;

use super::{ClusterError, DistanceMatrix};
use crate::preprocess::{FeatureKind, FeatureMatrix};

/// Per-feature dissimilarity rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GowerKind {
    /// `|a - b|`, assuming the feature is already scaled to unit range.
    Numeric,
    /// 0 if equal, 1 otherwise.
    Categorical,
}

#[inline]
fn feature_dissimilarity(a: f64, b: f64, kind: GowerKind) -> f64 {
    match kind {
        GowerKind::Numeric => (a - b).abs(),
        GowerKind::Categorical => {
            if a == b {
                0.0
            } else {
                1.0
            }
        }
    }
}

/// Unweighted Gower distance: mean of per-feature dissimilarities.
pub fn gower_distance(a: &[f64], b: &[f64], kinds: &[GowerKind]) -> Result<f64, ClusterError> {
    if a.len() != b.len() {
        return Err(ClusterError::ArityMismatch(a.len(), b.len()));
    }
    if kinds.len() != a.len() {
        return Err(ClusterError::ArityMismatch(a.len(), kinds.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .zip(kinds)
        .map(|((&x, &y), &k)| feature_dissimilarity(x, y, k))
        .sum();
    Ok(sum / a.len() as f64)
}

/// Weighted Gower distance `sum(w_j d_j) / sum(w_j)`.
pub fn gower_distance_weighted(
    a: &[f64],
    b: &[f64],
    kinds: &[GowerKind],
    weights: &[f64],
) -> Result<f64, ClusterError> {
    if a.len() != b.len() {
        return Err(ClusterError::ArityMismatch(a.len(), b.len()));
    }
    if kinds.len() != a.len() || weights.len() != a.len() {
        return Err(ClusterError::ArityMismatch(a.len(), weights.len()));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || total <= 0.0 {
        return Err(ClusterError::InvalidWeights);
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .zip(kinds)
        .zip(weights)
        .map(|(((&x, &y), &k), &w)| w * feature_dissimilarity(x, y, k))
        .sum();
    Ok(sum / total)
}

#[derive(Debug, Clone, Default)]
pub struct GowerOptions {
    /// Treat label-encoded features as categorical (match/mismatch) instead of numeric.
    pub categorical_match: bool,
    /// Per-feature weights; uniform when `None`.
    pub weights: Option<Vec<f64>>,
    pub parallel: bool,
}

impl GowerOptions {
    pub fn kinds_for(&self, x: &FeatureMatrix) -> Vec<GowerKind> {
        x.kinds
            .iter()
            .map(|k| match k {
                FeatureKind::EncodedCategorical if self.categorical_match => GowerKind::Categorical,
                _ => GowerKind::Numeric,
            })
            .collect()
    }
}

pub fn gower_matrix(x: &FeatureMatrix, opts: &GowerOptions) -> Result<DistanceMatrix, ClusterError> {
    let kinds = opts.kinds_for(x);
    let n = x.n_rows();
    let m = &x.values;
    let pair = |i: usize, j: usize| -> Result<f64, ClusterError> {
        match &opts.weights {
            Some(w) => gower_distance_weighted(m.row(i), m.row(j), &kinds, w),
            None => gower_distance(m.row(i), m.row(j), &kinds),
        }
    };
    let upper_row = |i: usize| -> Result<Vec<f64>, ClusterError> {
        (i + 1..n).map(|j| pair(i, j)).collect()
    };
    let uppers: Vec<Vec<f64>> = if opts.parallel {
        (0..n).into_par_iter().map(upper_row).collect::<Result<_, _>>()?
    } else {
        (0..n).map(upper_row).collect::<Result<_, _>>()?
    };
    let mut data = vec![0.0; n * n];
    for (i, row) in uppers.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix::from_vec(n, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use proptest::prelude::*;

    fn fm(rows: &[Vec<f64>]) -> FeatureMatrix {
        let p = rows[0].len();
        FeatureMatrix::new(
            Matrix::from_rows(rows),
            (0..p).map(|j| format!("f{j}")).collect(),
            vec![FeatureKind::Numeric; p],
        )
    }

    #[test]
    fn worked_examples() {
        let num = [GowerKind::Numeric; 3];
        assert_eq!(gower_distance(&[0.0; 3], &[1.0; 3], &num).unwrap(), 1.0);
        let d = gower_distance(&[0.2, 0.8], &[0.6, 0.8], &num[..2]).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        let cat = [GowerKind::Categorical, GowerKind::Numeric];
        assert_eq!(gower_distance(&[0.5, 0.1], &[0.5, 0.1], &cat).unwrap(), 0.0);
        assert_eq!(gower_distance(&[0.5, 0.1], &[0.25, 0.1], &cat).unwrap(), 0.5);
        assert!(matches!(
            gower_distance(&[0.0], &[0.0, 1.0], &num[..1]),
            Err(ClusterError::ArityMismatch(1, 2))
        ));
    }

    #[test]
    fn weighted_reduces_to_unweighted() {
        let k = [GowerKind::Numeric; 3];
        let a = [0.1, 0.5, 0.9];
        let b = [0.3, 0.2, 0.0];
        let u = gower_distance(&a, &b, &k).unwrap();
        let w = gower_distance_weighted(&a, &b, &k, &[2.0, 2.0, 2.0]).unwrap();
        assert!((u - w).abs() < 1e-15);
        assert!(gower_distance_weighted(&a, &b, &k, &[0.0; 3]).is_err());
    }

    #[test]
    fn small_matrices() {
        let one = gower_matrix(&fm(&[vec![0.3, 0.4]]), &GowerOptions::default()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.get(0, 0), 0.0);
        let dup = gower_matrix(
            &fm(&[vec![0.3, 0.4], vec![0.9, 0.1], vec![0.3, 0.4]]),
            &GowerOptions::default(),
        )
        .unwrap();
        assert_eq!(dup.get(0, 2), 0.0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| (0..5).map(|j| ((i * 7 + j * 13) % 17) as f64 / 16.0).collect())
            .collect();
        let x = fm(&rows);
        let seq = gower_matrix(&x, &GowerOptions::default()).unwrap();
        let par = gower_matrix(
            &x,
            &GowerOptions {
                parallel: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(seq, par);
    }

    proptest! {
        #[test]
        fn symmetric_bounded(rows in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 4), 2..6)) {
            let d = gower_matrix(&fm(&rows), &GowerOptions::default()).unwrap();
            for i in 0..d.len() {
                prop_assert_eq!(d.get(i, i), 0.0);
                for j in 0..d.len() {
                    prop_assert_eq!(d.get(i, j), d.get(j, i));
                    prop_assert!((0.0..=1.0).contains(&d.get(i, j)));
                }
            }
        }
    }
}
