use rand::seq::index::sample;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DataSet, Partition};
use crate::rng::stream_rng;

/// Settings for Lloyd's algorithm with random restarts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub nstart: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { nstart: 100, max_iter: 100 }
    }
}

/// Best restart of a k-means run.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub partition: Partition,
    pub centers: Vec<Vec<f64>>,
    pub wcss: f64,
    /// WCSS after each Lloyd iteration of the winning restart.
    pub history: Vec<f64>,
    pub restart: usize,
}

/// Lloyd's algorithm from `nstart` seeded restarts; keeps the restart with
/// the smallest within-cluster sum of squares (ties to the earliest restart).
///
/// Each restart draws `k` distinct observations as initial centers. A cluster
/// that empties during iteration is reseeded with the observation farthest
/// from its current center.
pub fn kmeans(data: &DataSet, k: usize, config: KMeansConfig, seed: u64) -> Result<KMeansFit> {
    let n = data.n();
    if k < 2 || k + 1 > n {
        return Err(Error::TrivialClustering { k, n });
    }
    if config.nstart == 0 {
        return Err(Error::Input("nstart must be at least 1".into()));
    }
    let distinct = distinct_rows(data);
    if k > distinct {
        return Err(Error::Input(format!(
            "k = {k} exceeds the number of distinct observations ({distinct})"
        )));
    }
    let fits: Vec<(f64, Vec<usize>, Vec<Vec<f64>>, Vec<f64>)> = (0..config.nstart)
        .into_par_iter()
        .map(|restart| lloyd(data, k, config.max_iter, seed, restart as u64))
        .collect();
    let (restart, best) = fits
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1 .0 < best.1 .0 { cur } else { best })
        .expect("nstart >= 1");
    let (wcss, labels, centers, history) = best;
    Ok(KMeansFit {
        partition: Partition::from_compact(labels, k)?,
        centers,
        wcss,
        history,
        restart,
    })
}

fn distinct_rows(data: &DataSet) -> usize {
    let mut rows: Vec<Vec<u64>> = data
        .rows()
        .map(|r| r.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    rows.len()
}

fn sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn nearest_center(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq(x, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(
    data: &DataSet,
    k: usize,
    max_iter: usize,
    seed: u64,
    restart: u64,
) -> (f64, Vec<usize>, Vec<Vec<f64>>, Vec<f64>) {
    let n = data.n();
    let p = data.dim();
    let mut rng = stream_rng(seed, restart);
    let mut centers: Vec<Vec<f64>> = sample(&mut rng, n, k)
        .into_iter()
        .map(|i| data.row(i).to_vec())
        .collect();
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest_center(data.row(i), &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            dists[i] = d;
        }
        changed |= repair_empty(data, k, &mut labels, &mut dists, &mut centers);
        history.push(dists.iter().sum());
        if !changed {
            break;
        }
        // centroid update
        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, x) in sums[labels[i]].iter_mut().zip(data.row(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            for s in sums[c].iter_mut() {
                *s /= counts[c] as f64;
            }
        }
        centers = sums;
    }
    let wcss = (0..n).map(|i| sq(data.row(i), &centers[labels[i]])).sum();
    if history.last() != Some(&wcss) {
        history.push(wcss);
    }
    (wcss, labels, centers, history)
}

/// Moves the farthest observation into each empty cluster. Returns whether
/// any label changed.
fn repair_empty(
    data: &DataSet,
    k: usize,
    labels: &mut [usize],
    dists: &mut [f64],
    centers: &mut [Vec<f64>],
) -> bool {
    let mut changed = false;
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return changed;
        };
        // farthest point whose own cluster can spare it
        let far = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n - 1 leaves a cluster with two members");
        labels[far] = empty;
        dists[far] = 0.0;
        centers[empty] = data.row(far).to_vec();
        changed = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> DataSet {
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.2, 0.0],
            vec![0.0, 0.2],
            vec![0.2, 0.2],
            vec![10.0, 10.0],
            vec![10.4, 10.0],
            vec![10.0, 10.4],
        ];
        DataSet::new(rows, None).unwrap()
    }

    #[test]
    fn recovers_blobs_with_closed_form_wcss() {
        let fit = kmeans(&blobs(), 2, KMeansConfig { nstart: 10, max_iter: 50 }, 1).unwrap();
        let l = fit.partition.labels();
        assert!(l[..4].iter().all(|&x| x == l[0]));
        assert!(l[4..].iter().all(|&x| x == l[4]));
        assert_ne!(l[0], l[4]);
        // blob A: 4 corners of a 0.2 square -> 4 * 0.02 = 0.08
        // blob B: centroid (10.1333, 10.1333) -> 3 * (2 * 0.4^2 / 9 + ...) computed by hand:
        // deviations in x: -0.1333, 0.2667, -0.1333 (same in y, permuted)
        let dx = [-0.4 / 3.0, 0.8 / 3.0, -0.4 / 3.0];
        let dy = [-0.4 / 3.0, -0.4 / 3.0, 0.8 / 3.0];
        let b: f64 = dx.iter().zip(&dy).map(|(x, y)| x * x + y * y).sum();
        assert!((fit.wcss - (0.08 + b)).abs() < 1e-12);
    }

    #[test]
    fn more_restarts_never_hurt() {
        let data = blobs();
        for seed in 0..5 {
            let one = kmeans(&data, 3, KMeansConfig { nstart: 1, max_iter: 50 }, seed).unwrap();
            let many = kmeans(&data, 3, KMeansConfig { nstart: 100, max_iter: 50 }, seed).unwrap();
            assert!(many.wcss <= one.wcss);
        }
    }

    #[test]
    fn wcss_is_monotone_within_a_restart() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let t = i as f64;
                vec![(t * 1.7).sin() * 5.0 + (i % 3) as f64 * 4.0, (t * 0.3).cos() * 3.0]
            })
            .collect();
        let data = DataSet::new(rows, None).unwrap();
        for restart in 0..20 {
            let (_, _, _, history) = lloyd(&data, 4, 100, 9, restart);
            for w in history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{history:?}");
            }
        }
    }

    #[test]
    fn k_equal_n_minus_one_pairs_closest_points() {
        let rows = vec![vec![0.0], vec![1.0], vec![3.0], vec![3.5], vec![7.0]];
        let data = DataSet::new(rows, None).unwrap();
        let fit = kmeans(&data, 4, KMeansConfig { nstart: 50, max_iter: 50 }, 3).unwrap();
        // enumeration: merging the closest pair (3, 3.5) costs 0.125, the minimum
        let l = fit.partition.labels();
        assert_eq!(l[2], l[3]);
        assert_eq!(fit.partition.sizes().iter().filter(|&&s| s == 2).count(), 1);
        assert!((fit.wcss - 0.125).abs() < 1e-12);
    }

    #[test]
    fn too_few_distinct_points() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0], vec![2.0]];
        let data = DataSet::new(rows, None).unwrap();
        assert!(matches!(kmeans(&data, 3, KMeansConfig::default(), 0), Err(Error::Input(_))));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = kmeans(&blobs(), 3, KMeansConfig::default(), 42).unwrap();
        let b = kmeans(&blobs(), 3, KMeansConfig::default(), 42).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.wcss.to_bits(), b.wcss.to_bits());
    }
}
