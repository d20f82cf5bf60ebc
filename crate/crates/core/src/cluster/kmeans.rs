use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Centers, ClusterAssignment, ClusterError};
use crate::matrix::Matrix;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(row, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn cost(x: &Matrix, labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    x.rows()
        .zip(labels)
        .map(|(r, &l)| sq_dist(r, &centroids[l]))
        .sum()
}

/// Lloyd's algorithm from `k` seeded distinct rows. Empty clusters are
/// re-seeded with the row farthest from its current centroid.
pub fn k_means(
    x: &Matrix,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterAssignment, ClusterError> {
    let n = x.n_rows();
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = rand::seq::index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| x.row(i).to_vec())
        .collect();

    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let mut assigned: Vec<(usize, f64)> = x.rows().map(|r| nearest(r, &centroids)).collect();
        let mut counts = vec![0usize; k];
        for &(c, _) in &assigned {
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            // Farthest row among clusters that can spare one.
            let far = (0..n)
                .filter(|&i| counts[assigned[i].0] > 1)
                .fold(None, |best: Option<(usize, f64)>, i| match best {
                    Some((_, d)) if d >= assigned[i].1 => best,
                    _ => Some((i, assigned[i].1)),
                });
            if let Some((i, _)) = far {
                counts[assigned[i].0] -= 1;
                assigned[i] = (c, 0.0);
                counts[c] = 1;
                centroids[c] = x.row(i).to_vec();
            }
        }
        let new_labels: Vec<usize> = assigned.iter().map(|&(c, _)| c).collect();
        if new_labels == labels {
            break;
        }
        labels = new_labels;

        let p = x.n_cols();
        let mut sums = vec![vec![0.0; p]; k];
        for (r, &l) in x.rows().zip(&labels) {
            for (s, v) in sums[l].iter_mut().zip(r) {
                *s += v;
            }
        }
        for (c, s) in sums.into_iter().enumerate() {
            if counts[c] > 0 {
                centroids[c] = s.into_iter().map(|v| v / counts[c] as f64).collect();
            }
        }
        history.push(cost(x, &labels, &centroids));
        iterations += 1;
        if iterations >= max_iter {
            break;
        }
    }
    let total_cost = cost(x, &labels, &centroids);
    Ok(ClusterAssignment {
        labels,
        centers: Centers::Centroids(centroids),
        total_cost,
        cost_history: history,
        iterations,
    })
}
