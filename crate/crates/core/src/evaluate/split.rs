use rand::seq::SliceRandom;

use super::EvalError;
use crate::rng::rng_for;

/// A train/test partition of row indices, both sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn rows_by_class(y: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes
        .into_iter()
        .map(|c| (c, (0..y.len()).filter(|&i| y[i] == c).collect()))
        .collect()
}

/// Stratified shuffle split. Returns the partition and one warning per
/// class too small to appear on both sides (kept entirely in train).
pub fn percentage_split(
    y: &[usize],
    ratio: f64,
    seed: u64,
) -> Result<(Split, Vec<String>), EvalError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(EvalError::InvalidRatio(ratio));
    }
    if y.len() < 2 {
        return Err(EvalError::TooFewRows(y.len()));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut warnings = Vec::new();
    for (c, mut rows) in rows_by_class(y) {
        if rows.len() < 2 {
            warnings.push(format!(
                "class {c} has {} row(s); kept entirely in the training side",
                rows.len()
            ));
            train.extend(rows);
            continue;
        }
        let mut rng = rng_for(seed, c as u64);
        rows.shuffle(&mut rng);
        let n_test = (((1.0 - ratio) * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((Split { train, test }, warnings))
}

/// Stratified k-fold: each class is shuffled and dealt round-robin, with
/// the dealing position carried across classes so fold sizes stay level.
pub fn stratified_k_fold(y: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFolds(k));
    }
    if k > y.len() {
        return Err(EvalError::KTooLarge { k, n: y.len() });
    }
    let mut folds = vec![Vec::new(); k];
    let mut pos = 0;
    for (c, mut rows) in rows_by_class(y) {
        let mut rng = rng_for(seed, c as u64);
        rows.shuffle(&mut rng);
        for r in rows {
            folds[pos % k].push(r);
            pos += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Train/test pairs for each fold, in fold order.
pub fn fold_splits(folds: &[Vec<usize>]) -> Vec<Split> {
    (0..folds.len())
        .map(|f| {
            let mut train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            train.sort_unstable();
            Split {
                train,
                test: folds[f].clone(),
            }
        })
        .collect()
}
