//! Feature selection: chi-square ranking, random-forest impurity importance,
//! and correlation-based subset search (CFS) with best-first expansion.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{ClassifyError, Forest, ForestParams};
use crate::preprocess::FeatureMatrix;

#[derive(Debug, Error)]
pub enum FeatselError {
    #[error("feature {feature:?} has a negative value at row {row}")]
    NegativeFeature { feature: String, row: usize },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("empty feature subset")]
    EmptySubset,
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("requested top {k} of {p} features")]
    KTooLarge { k: usize, p: usize },
    #[error("label count {0} does not match row count {1}")]
    LengthMismatch(usize, usize),
    #[error("stall_limit must be positive")]
    InvalidStallLimit,
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature_name: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Chi2,
    Rf,
    Cfs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    pub method: SelectionMethod,
    pub feature_names: Vec<String>,
    /// Subset merit for CFS; `None` for rank-based selections.
    pub merit: Option<f64>,
}

impl FeatureSubset {
    pub fn k(&self) -> usize {
        self.feature_names.len()
    }
}

fn distinct_classes(y: &[usize]) -> Vec<usize> {
    let mut c = y.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

fn check_labels(x: &FeatureMatrix, y: &[usize]) -> Result<Vec<usize>, FeatselError> {
    if y.len() != x.n_rows() {
        return Err(FeatselError::LengthMismatch(y.len(), x.n_rows()));
    }
    let classes = distinct_classes(y);
    if classes.len() < 2 {
        return Err(FeatselError::SingleClass);
    }
    Ok(classes)
}

/// Chi-square statistic of each nonnegative feature against the class.
pub fn chi2_scores(x: &FeatureMatrix, y: &[usize]) -> Result<Vec<FeatureScore>, FeatselError> {
    let classes = check_labels(x, y)?;
    let n = y.len() as f64;
    let code: Vec<usize> = y.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    let mut freq = vec![0.0; classes.len()];
    code.iter().for_each(|&c| freq[c] += 1.0 / n);
    let mut out = Vec::with_capacity(x.n_features());
    for (j, name) in x.feature_names.iter().enumerate() {
        let mut observed = vec![0.0; classes.len()];
        for (r, &c) in code.iter().enumerate() {
            let v = x.values.get(r, j);
            if v < 0.0 {
                return Err(FeatselError::NegativeFeature {
                    feature: name.clone(),
                    row: r,
                });
            }
            observed[c] += v;
        }
        let total: f64 = observed.iter().sum();
        let score = observed
            .iter()
            .zip(&freq)
            .map(|(o, f)| {
                let e = total * f;
                if e > 0.0 {
                    (o - e).powi(2) / e
                } else {
                    0.0
                }
            })
            .sum();
        out.push(FeatureScore {
            feature_name: name.clone(),
            score,
        });
    }
    Ok(out)
}

/// Descending score, ties by feature name.
pub fn rank(scores: &[FeatureScore]) -> Vec<FeatureScore> {
    let mut s = scores.to_vec();
    s.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.feature_name.cmp(&b.feature_name))
    });
    s
}

/// The `k` best-ranked features; selections for increasing `k` are nested.
pub fn top_k(
    scores: &[FeatureScore],
    k: usize,
    method: SelectionMethod,
) -> Result<FeatureSubset, FeatselError> {
    if k == 0 || k > scores.len() {
        return Err(FeatselError::KTooLarge { k, p: scores.len() });
    }
    Ok(FeatureSubset {
        method,
        feature_names: rank(scores)
            .into_iter()
            .take(k)
            .map(|s| s.feature_name)
            .collect(),
        merit: None,
    })
}

/// Mean decrease in Gini impurity from a random forest, normalized to sum 1.
pub fn rf_importance(
    x: &FeatureMatrix,
    y: &[usize],
    params: &ForestParams,
    seed: u64,
) -> Result<Vec<FeatureScore>, FeatselError> {
    let classes = check_labels(x, y)?;
    let code: Vec<usize> = y.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    let forest = Forest::fit(&x.values, &code, classes.len(), params, seed, false)?;
    Ok(x.feature_names
        .iter()
        .zip(forest.feature_importance())
        .map(|(n, s)| FeatureScore {
            feature_name: n.clone(),
            score: s,
        })
        .collect())
}

/// Pearson correlation; a constant input yields 0.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

/// Absolute feature-class and feature-feature correlations, computed once.
struct CorrelationCache {
    rcf: Vec<f64>,
    rff: Vec<Vec<f64>>,
}

impl CorrelationCache {
    fn new(x: &FeatureMatrix, y: &[usize]) -> Self {
        let yc: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let cols: Vec<Vec<f64>> = (0..x.n_features()).map(|j| x.values.column(j)).collect();
        let rcf = cols.iter().map(|c| pearson(c, &yc).abs()).collect();
        let p = cols.len();
        let mut rff = vec![vec![1.0; p]; p];
        for i in 0..p {
            for j in i + 1..p {
                let r = pearson(&cols[i], &cols[j]).abs();
                rff[i][j] = r;
                rff[j][i] = r;
            }
        }
        CorrelationCache { rcf, rff }
    }

    fn merit(&self, subset: &[usize]) -> f64 {
        let k = subset.len() as f64;
        let rcf = subset.iter().map(|&j| self.rcf[j]).sum::<f64>() / k;
        let mut pair_sum = 0.0;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                pair_sum += self.rff[i][j];
            }
        }
        let pairs = k * (k - 1.0) / 2.0;
        let rff = if pairs > 0.0 { pair_sum / pairs } else { 0.0 };
        k * rcf / (k + k * (k - 1.0) * rff).sqrt()
    }
}

fn resolve(x: &FeatureMatrix, names: &[String]) -> Result<Vec<usize>, FeatselError> {
    names
        .iter()
        .map(|n| x.feature_index(n).ok_or_else(|| FeatselError::UnknownFeature(n.clone())))
        .collect()
}

/// Hall's CFS merit of `subset`, with the class taken as its integer code.
pub fn cfs_merit(subset: &[String], x: &FeatureMatrix, y: &[usize]) -> Result<f64, FeatselError> {
    if subset.is_empty() {
        return Err(FeatselError::EmptySubset);
    }
    if y.len() != x.n_rows() {
        return Err(FeatselError::LengthMismatch(y.len(), x.n_rows()));
    }
    let idx = resolve(x, subset)?;
    let sub = FeatureMatrix::new(
        x.values.select_cols(&idx),
        subset.to_vec(),
        idx.iter().map(|&j| x.kinds[j]).collect(),
    );
    let cache = CorrelationCache::new(&sub, y);
    Ok(cache.merit(&(0..subset.len()).collect::<Vec<_>>()))
}

pub const DEFAULT_STALL_LIMIT: usize = 5;

/// Merit gains below this are not counted as improvements, so that
/// rounding noise cannot make a redundant feature look useful.
const IMPROVEMENT_EPS: f64 = 1e-12;

struct OpenEntry {
    merit: f64,
    key: Vec<String>,
    members: Vec<usize>,
}

fn sorted_names(x: &FeatureMatrix, members: &[usize]) -> Vec<String> {
    let mut k: Vec<String> = members.iter().map(|&j| x.feature_names[j].clone()).collect();
    k.sort();
    k
}

fn better(a_merit: f64, a_key: &[String], b_merit: f64, b_key: &[String]) -> bool {
    match a_merit.total_cmp(&b_merit) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a_key < b_key,
    }
}

/// Forward best-first search over subsets, scored by [`cfs_merit`].
///
/// The search stops once `stall_limit` consecutive expansions fail to
/// improve the best subset seen, or the open list empties. Returned names
/// follow the matrix column order.
pub fn best_first_cfs(
    x: &FeatureMatrix,
    y: &[usize],
    stall_limit: usize,
) -> Result<FeatureSubset, FeatselError> {
    if stall_limit == 0 {
        return Err(FeatselError::InvalidStallLimit);
    }
    if x.n_features() == 0 {
        return Err(FeatselError::EmptySubset);
    }
    if y.len() != x.n_rows() {
        return Err(FeatselError::LengthMismatch(y.len(), x.n_rows()));
    }
    let cache = CorrelationCache::new(x, y);
    let p = x.n_features();
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut open: Vec<OpenEntry> = Vec::new();
    let mut best: Option<(f64, Vec<String>, Vec<usize>)> = None;
    let mut stall = 0;
    let mut current: Vec<usize> = Vec::new();
    loop {
        let mut improved = false;
        for f in 0..p {
            if current.contains(&f) {
                continue;
            }
            let mut child = current.clone();
            child.push(f);
            child.sort_unstable();
            if !visited.insert(child.clone()) {
                continue;
            }
            let merit = cache.merit(&child);
            let key = sorted_names(x, &child);
            let replace = match &best {
                None => true,
                Some((bm, _, _)) => merit > bm + IMPROVEMENT_EPS * bm.abs().max(1.0),
            };
            if replace {
                best = Some((merit, key.clone(), child.clone()));
                improved = true;
            }
            open.push(OpenEntry {
                merit,
                key,
                members: child,
            });
        }
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= stall_limit {
                break;
            }
        }
        let Some(pos) = (0..open.len()).reduce(|b, i| {
            if better(open[i].merit, &open[i].key, open[b].merit, &open[b].key) {
                i
            } else {
                b
            }
        }) else {
            break;
        };
        current = open.swap_remove(pos).members;
    }
    let (merit, _, members) = best.expect("at least one feature was scored");
    Ok(FeatureSubset {
        method: SelectionMethod::Cfs,
        feature_names: members.iter().map(|&j| x.feature_names[j].clone()).collect(),
        merit: Some(merit),
    })
}

pub fn write_scores_csv<W: Write>(w: W, scores: &[FeatureScore]) -> Result<(), FeatselError> {
    let mut wr = csv::Writer::from_writer(w);
    for s in scores {
        wr.serialize(s)?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_scores_csv<R: Read>(r: R) -> Result<Vec<FeatureScore>, FeatselError> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|r| r.map_err(FeatselError::from)).collect()
}

/// A subset as `(feature_name, score)` rows, scored by `scores` when a
/// name appears there and by NaN otherwise.
pub fn write_subset_csv<W: Write>(
    w: W,
    subset: &FeatureSubset,
    scores: &[FeatureScore],
) -> Result<(), FeatselError> {
    let rows: Vec<FeatureScore> = subset
        .feature_names
        .iter()
        .map(|n| FeatureScore {
            feature_name: n.clone(),
            score: scores
                .iter()
                .find(|s| &s.feature_name == n)
                .map(|s| s.score)
                .unwrap_or(f64::NAN),
        })
        .collect();
    write_scores_csv(w, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::preprocess::FeatureKind;
    use crate::rng::rng_for;
    use proptest::prelude::*;
    use rand::Rng;

    fn fm(cols: &[Vec<f64>]) -> FeatureMatrix {
        let n = cols[0].len();
        let rows: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let p = cols.len();
        FeatureMatrix::new(
            Matrix::from_rows(&rows),
            (0..p).map(|i| format!("f{i}")).collect(),
            vec![FeatureKind::Numeric; p],
        )
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    // Textbook chi-square written out independently of the implementation.
    fn chi2_oracle(col: &[f64], y: &[usize]) -> f64 {
        let n = y.len() as f64;
        let total: f64 = col.iter().sum();
        let mut s = 0.0;
        for c in 0..=*y.iter().max().unwrap() {
            let cnt = y.iter().filter(|&&v| v == c).count() as f64;
            if cnt == 0.0 {
                continue;
            }
            let o: f64 = col.iter().zip(y).filter(|(_, &v)| v == c).map(|(x, _)| x).sum();
            let e = total * cnt / n;
            if e > 0.0 {
                s += (o - e) * (o - e) / e;
            }
        }
        s
    }

    fn corr_oracle(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
        if va == 0.0 || vb == 0.0 {
            0.0
        } else {
            cov / (va * vb).sqrt()
        }
    }

    fn merit_oracle(cols: &[Vec<f64>], y: &[usize], subset: &[usize]) -> f64 {
        let yc: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let k = subset.len() as f64;
        let rcf: f64 = subset.iter().map(|&j| corr_oracle(&cols[j], &yc).abs()).sum::<f64>() / k;
        let mut rs = Vec::new();
        for a in 0..subset.len() {
            for b in a + 1..subset.len() {
                rs.push(corr_oracle(&cols[subset[a]], &cols[subset[b]]).abs());
            }
        }
        let rff = if rs.is_empty() { 0.0 } else { rs.iter().sum::<f64>() / rs.len() as f64 };
        k * rcf / (k + k * (k - 1.0) * rff).sqrt()
    }

    #[test]
    fn chi2_worked_example_is_two() {
        let x = fm(&[vec![1.0, 1.0, 0.0, 0.0]]);
        let s = chi2_scores(&x, &[0, 0, 1, 1]).unwrap();
        assert!((s[0].score - 2.0).abs() < 1e-12);
    }

    #[test]
    fn chi2_constant_feature_scores_zero() {
        let x = fm(&[vec![0.5; 6]]);
        let s = chi2_scores(&x, &[0, 0, 1, 1, 2, 2]).unwrap();
        assert!(s[0].score.abs() < 1e-12);
    }

    #[test]
    fn chi2_rejects_negative_and_single_class() {
        let x = fm(&[vec![0.5, -0.1]]);
        assert!(matches!(chi2_scores(&x, &[0, 1]), Err(FeatselError::NegativeFeature { .. })));
        let x = fm(&[vec![0.5, 0.1]]);
        assert!(matches!(chi2_scores(&x, &[1, 1]), Err(FeatselError::SingleClass)));
    }

    #[test]
    fn chi2_matches_oracle_on_random_instances() {
        for seed in 0..20 {
            let mut rng = rng_for(seed, 0);
            let n = rng.random_range(6..30);
            let cols: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
            let mut y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            y[0] = 0;
            y[1] = 1;
            let s = chi2_scores(&fm(&cols), &y).unwrap();
            for (j, c) in cols.iter().enumerate() {
                assert!((s[j].score - chi2_oracle(c, &y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn top_k_is_nested_and_tie_broken_by_name() {
        let scores: Vec<FeatureScore> = ["e", "b", "a", "d", "c", "f", "g", "h"]
            .iter()
            .zip([1.0, 3.0, 3.0, 0.5, 2.0, 2.0, 0.1, 0.0])
            .map(|(n, s)| FeatureScore { feature_name: n.to_string(), score: s })
            .collect();
        let t5 = top_k(&scores, 5, SelectionMethod::Chi2).unwrap();
        let t7 = top_k(&scores, 7, SelectionMethod::Chi2).unwrap();
        assert_eq!(t5.feature_names, names(&["a", "b", "c", "f", "e"]));
        assert_eq!(t7.feature_names[..5], t5.feature_names[..]);
        assert!(top_k(&scores, 9, SelectionMethod::Chi2).is_err());
    }

    #[test]
    fn rf_importance_finds_the_determining_feature() {
        let mut rng = rng_for(77, 0);
        let n = 200;
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let mut cols = vec![y.iter().map(|&c| c as f64 * 0.5 + 0.25).collect::<Vec<f64>>()];
        for _ in 0..4 {
            cols.push((0..n).map(|_| rng.random::<f64>()).collect());
        }
        let s = rf_importance(&fm(&cols), &y, &ForestParams::random_forest(), 3).unwrap();
        let total: f64 = s.iter().map(|v| v.score).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(s[0].score >= 0.5, "importance {}", s[0].score);
        let again = rf_importance(&fm(&cols), &y, &ForestParams::random_forest(), 3).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn cfs_single_feature_merit_is_abs_correlation() {
        let cols = vec![vec![0.1, 0.4, 0.35, 0.8, 0.9, 0.2]];
        let y = [0, 1, 0, 2, 2, 1];
        let m = cfs_merit(&names(&["f0"]), &fm(&cols), &y).unwrap();
        let yc: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        assert!((m - corr_oracle(&cols[0], &yc).abs()).abs() < 1e-12);
    }

    #[test]
    fn cfs_duplicated_feature_formula() {
        // Two copies of one feature: r_ff = 1, so the merit equals r_cf.
        let y = [0, 0, 1, 1, 2, 2];
        let a = vec![0.0, 0.2, 0.3, 0.6, 0.7, 1.2];
        let x = fm(&[a.clone(), a.clone()]);
        let yc: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let r = corr_oracle(&a, &yc).abs();
        let m = cfs_merit(&names(&["f0", "f1"]), &x, &y).unwrap();
        assert!((m - 2.0 * r / 4f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cfs_empty_and_unknown() {
        let x = fm(&[vec![0.0, 1.0]]);
        assert!(matches!(cfs_merit(&[], &x, &[0, 1]), Err(FeatselError::EmptySubset)));
        assert!(matches!(cfs_merit(&names(&["zz"]), &x, &[0, 1]), Err(FeatselError::UnknownFeature(_))));
    }

    #[test]
    fn cfs_constant_feature_contributes_zero() {
        let x = fm(&[vec![0.3; 4], vec![0.0, 0.1, 0.9, 1.0]]);
        let y = [0, 0, 1, 1];
        assert_eq!(cfs_merit(&names(&["f0"]), &x, &y).unwrap(), 0.0);
    }

    fn exhaustive_best(cols: &[Vec<f64>], y: &[usize]) -> (f64, Vec<usize>) {
        let p = cols.len();
        let mut best = (f64::NEG_INFINITY, vec![]);
        for mask in 1u32..(1 << p) {
            let s: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
            let m = merit_oracle(cols, y, &s);
            if m > best.0 + 1e-12 {
                best = (m, s);
            }
        }
        best
    }

    #[test]
    fn best_first_finds_the_perfect_feature() {
        let mut rng = rng_for(5, 0);
        let n = 60;
        let y: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let mut cols = vec![y.iter().map(|&c| c as f64 / 2.0).collect::<Vec<f64>>()];
        for _ in 0..4 {
            cols.push((0..n).map(|_| rng.random::<f64>()).collect());
        }
        let s = best_first_cfs(&fm(&cols), &y, DEFAULT_STALL_LIMIT).unwrap();
        assert_eq!(s.feature_names, names(&["f0"]));
        let (bm, bs) = exhaustive_best(&cols, &y);
        assert_eq!(bs, vec![0]);
        assert!((s.merit.unwrap() - bm).abs() < 1e-9);
    }

    #[test]
    fn best_first_on_identical_copies_keeps_one() {
        let a = vec![0.0, 0.1, 0.5, 0.4, 0.9, 1.0];
        let x = fm(&[a.clone(), a.clone(), a.clone()]);
        let s = best_first_cfs(&x, &[0, 0, 1, 1, 2, 2], 5).unwrap();
        assert_eq!(s.k(), 1);
    }

    #[test]
    fn best_first_with_large_stall_matches_exhaustive() {
        for seed in 0..15 {
            let mut rng = rng_for(seed, 9);
            let n = 40;
            let p = rng.random_range(2..7);
            let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let cols: Vec<Vec<f64>> = (0..p)
                .map(|j| {
                    (0..n)
                        .map(|r| rng.random::<f64>() + if j % 2 == 0 { y[r] as f64 * 0.3 } else { 0.0 })
                        .collect()
                })
                .collect();
            let s = best_first_cfs(&fm(&cols), &y, 1 << p).unwrap();
            let (bm, _) = exhaustive_best(&cols, &y);
            assert!((s.merit.unwrap() - bm).abs() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn scores_csv_round_trip() {
        let s = vec![
            FeatureScore { feature_name: "sjr".into(), score: 0.125 },
            FeatureScore { feature_name: "snip".into(), score: 1.0 / 3.0 },
        ];
        let mut buf = Vec::new();
        write_scores_csv(&mut buf, &s).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("feature_name,score\n"));
        assert_eq!(read_scores_csv(&buf[..]).unwrap(), s);
    }

    proptest! {
        #[test]
        fn merit_matches_oracle(
            data in proptest::collection::vec(0.0f64..1.0, 24),
            ys in proptest::collection::vec(0usize..3, 8),
            mask in 1u32..8,
        ) {
            let cols: Vec<Vec<f64>> = data.chunks(8).map(|c| c.to_vec()).collect();
            let subset: Vec<usize> = (0..3).filter(|j| mask & (1 << j) != 0).collect();
            let names: Vec<String> = subset.iter().map(|j| format!("f{j}")).collect();
            let m = cfs_merit(&names, &fm(&cols), &ys).unwrap();
            prop_assert!((m - merit_oracle(&cols, &ys, &subset)).abs() < 1e-9);
        }
    }
}
