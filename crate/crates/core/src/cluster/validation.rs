use std::collections::BTreeMap;

use super::{ClusterError, DistanceMatrix};

/// Per-point silhouette values. Points in singleton clusters get 0.
pub fn silhouette_samples(d: &DistanceMatrix, labels: &[usize]) -> Result<Vec<f64>, ClusterError> {
    let n = d.len();
    if labels.len() != n {
        return Err(ClusterError::LengthMismatch(labels.len(), n));
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *sizes.entry(l).or_default() += 1;
    }
    if sizes.len() < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let ids: Vec<usize> = sizes.keys().copied().collect();
    let slot = |l: usize| ids.binary_search(&l).unwrap();
    let counts: Vec<usize> = sizes.values().copied().collect();

    let mut out = Vec::with_capacity(n);
    let mut sums = vec![0.0; ids.len()];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[slot(labels[j])] += d.get(i, j);
            }
        }
        let own = slot(labels[i]);
        if counts[own] == 1 {
            out.push(0.0);
            continue;
        }
        let a = sums[own] / (counts[own] - 1) as f64;
        let b = (0..ids.len())
            .filter(|&c| c != own)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        out.push(if denom > 0.0 { (b - a) / denom } else { 0.0 });
    }
    Ok(out)
}

/// Mean silhouette width over all points.
pub fn silhouette_width(d: &DistanceMatrix, labels: &[usize]) -> Result<f64, ClusterError> {
    let s = silhouette_samples(d, labels)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index from the pair-counting contingency table. When both
/// partitions are trivial in the same way the index is undefined and 1 is returned.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, ClusterError> {
    if a.len() != b.len() {
        return Err(ClusterError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(ClusterError::TooFewPoints);
    }
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sum_a * sum_b / choose2(a.len());
    let max = (sum_a + sum_b) / 2.0;
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}
