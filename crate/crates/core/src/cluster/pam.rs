//! Partitioning Around Medoids: greedy BUILD followed by best-improvement SWAP.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Centers, ClusterAssignment, ClusterError, DistanceMatrix};

/// Starting configuration for the SWAP phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PamInit {
    /// Classical greedy BUILD; deterministic and independent of the seed.
    #[default]
    Build,
    /// `k` distinct rows drawn with the seed. Used for stability checks.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMedoidsParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub init: PamInit,
}

impl KMedoidsParams {
    pub fn new(k: usize) -> Self {
        KMedoidsParams {
            k,
            seed: 0,
            max_iter: 100,
            init: PamInit::Build,
        }
    }
}

fn build(d: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = d.len();
    let mut medoids = Vec::with_capacity(k);
    let first = (0..n)
        .map(|i| (i, d.row(i).iter().sum::<f64>()))
        .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best })
        .0;
    medoids.push(first);
    let mut nearest: Vec<f64> = d.row(first).to_vec();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for c in 0..n {
            if medoids.contains(&c) {
                continue;
            }
            let gain: f64 = (0..n).map(|j| (nearest[j] - d.get(c, j)).max(0.0)).sum();
            if gain > best.1 {
                best = (c, gain);
            }
        }
        let c = best.0;
        medoids.push(c);
        for (j, nj) in nearest.iter_mut().enumerate() {
            *nj = nj.min(d.get(c, j));
        }
    }
    medoids
}

/// Nearest and second-nearest medoid distances for every row.
fn nearest_two(d: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = d.len();
    let mut near_idx = vec![0; n];
    let mut near = vec![f64::INFINITY; n];
    let mut second = vec![f64::INFINITY; n];
    for j in 0..n {
        for (pos, &m) in medoids.iter().enumerate() {
            let v = d.get(j, m);
            if v < near[j] {
                second[j] = near[j];
                near[j] = v;
                near_idx[j] = pos;
            } else if v < second[j] {
                second[j] = v;
            }
        }
    }
    (near_idx, near, second)
}

fn total_cost(d: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..d.len())
        .map(|j| medoids.iter().map(|&m| d.get(j, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Change in total cost when the medoid at `pos` is replaced by row `candidate`.
pub fn swap_delta(d: &DistanceMatrix, medoids: &[usize], pos: usize, candidate: usize) -> f64 {
    let mut swapped = medoids.to_vec();
    swapped[pos] = candidate;
    total_cost(d, &swapped) - total_cost(d, medoids)
}

pub fn k_medoids(
    d: &DistanceMatrix,
    params: &KMedoidsParams,
) -> Result<ClusterAssignment, ClusterError> {
    let n = d.len();
    let k = params.k;
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    let mut medoids = match params.init {
        PamInit::Build => build(d, k),
        PamInit::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rand::seq::index::sample(&mut rng, n, k).into_vec()
        }
    };

    let mut cost = total_cost(d, &medoids);
    let mut history = vec![cost];
    let mut iterations = 0;
    let tol = 1e-12 * cost.abs().max(1.0);
    while iterations < params.max_iter {
        let (near_idx, near, second) = nearest_two(d, &medoids);
        let mut best = (0usize, 0usize, 0.0f64);
        for pos in 0..k {
            for h in 0..n {
                if medoids.contains(&h) {
                    continue;
                }
                let mut delta = 0.0;
                for j in 0..n {
                    let dh = d.get(j, h);
                    let new = if near_idx[j] == pos {
                        dh.min(second[j])
                    } else {
                        dh.min(near[j])
                    };
                    delta += new - near[j];
                }
                if delta < best.2 {
                    best = (pos, h, delta);
                }
            }
        }
        if best.2 >= -tol {
            break;
        }
        medoids[best.0] = best.1;
        cost = total_cost(d, &medoids);
        history.push(cost);
        iterations += 1;
    }

    medoids.sort_unstable();
    let labels = (0..n)
        .map(|j| {
            if let Some(own) = medoids.iter().position(|&m| m == j) {
                return own;
            }
            let mut best = (0, f64::INFINITY);
            for (pos, &m) in medoids.iter().enumerate() {
                let v = d.get(j, m);
                if v < best.1 {
                    best = (pos, v);
                }
            }
            best.0
        })
        .collect::<Vec<_>>();
    let total = (0..n).map(|j| d.get(j, medoids[labels[j]])).sum();
    Ok(ClusterAssignment {
        labels,
        centers: Centers::Medoids(medoids),
        total_cost: total,
        cost_history: history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn two_blobs_match_exhaustive_search() {
        let d = DistanceMatrix::from_points_1d(&[0.0, 0.1, 0.2, 10.0, 10.1, 10.2]);
        let fit = k_medoids(&d, &KMedoidsParams::new(2)).unwrap();
        assert_eq!(fit.labels, vec![0, 0, 0, 1, 1, 1]);
        let best = combinations(6, 2)
            .into_iter()
            .map(|m| total_cost(&d, &m))
            .fold(f64::INFINITY, f64::min);
        assert!((fit.total_cost - best).abs() < 1e-12);
        assert_eq!(fit.medoids(), Some(&[1usize, 4][..]));
    }

    #[test]
    fn k_equals_n_and_k_one() {
        let pts = [0.3, 1.7, 2.0, 5.5];
        let d = DistanceMatrix::from_points_1d(&pts);
        let all = k_medoids(&d, &KMedoidsParams::new(4)).unwrap();
        assert_eq!(all.total_cost, 0.0);
        assert_eq!(all.labels, vec![0, 1, 2, 3]);

        let one = k_medoids(&d, &KMedoidsParams::new(1)).unwrap();
        let brute = (0..4)
            .min_by(|&a, &b| {
                let sa: f64 = d.row(a).iter().sum();
                let sb: f64 = d.row(b).iter().sum();
                sa.partial_cmp(&sb).unwrap()
            })
            .unwrap();
        assert_eq!(one.medoids(), Some(&[brute][..]));
        assert!(matches!(
            k_medoids(&d, &KMedoidsParams::new(5)),
            Err(ClusterError::KTooLarge { k: 5, n: 4 })
        ));
    }

    #[test]
    fn random_init_converges_to_swap_optimum() {
        let pts: Vec<f64> = (0..15).map(|i| ((i * 37) % 23) as f64 / 3.0).collect();
        let d = DistanceMatrix::from_points_1d(&pts);
        for seed in 0..5 {
            let p = KMedoidsParams {
                init: PamInit::Random,
                seed,
                ..KMedoidsParams::new(3)
            };
            let fit = k_medoids(&d, &p).unwrap();
            let meds = fit.medoids().unwrap();
            for pos in 0..3 {
                for h in (0..15).filter(|h| !meds.contains(h)) {
                    assert!(swap_delta(&d, meds, pos, h) > -1e-9);
                }
            }
            assert!(fit.cost_history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn duplicate_points_keep_every_cluster_nonempty() {
        let d = DistanceMatrix::from_points_1d(&[1.0, 1.0, 1.0]);
        let fit = k_medoids(&d, &KMedoidsParams::new(3)).unwrap();
        let mut seen = fit.labels.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
    }
}
