use crate::error::{Error, Result};
use crate::geometry::{DistanceMatrix, Partition};

/// Result of partitioning around medoids.
#[derive(Debug, Clone, PartialEq)]
pub struct PamFit {
    /// Medoid indices in ascending order; cluster `r` belongs to `medoids[r]`.
    pub medoids: Vec<usize>,
    pub partition: Partition,
    /// Total dissimilarity of every object to its nearest medoid.
    pub cost: f64,
    /// Medoids chosen by BUILD, in selection order.
    pub build: Vec<usize>,
    /// Cost after BUILD and after each accepted swap.
    pub trace: Vec<f64>,
}

/// Nearest medoid for every object. Ties go to the lower object index, except
/// that a medoid always belongs to its own cluster.
///
/// Cluster `r` of the result corresponds to `medoids[r]`.
pub fn assign_to_medoids(dist: &DistanceMatrix, medoids: &[usize]) -> Result<Partition> {
    let n = dist.n();
    let k = medoids.len();
    if k < 2 || k + 1 > n {
        return Err(Error::TrivialClustering { k, n });
    }
    if let Some(&bad) = medoids.iter().find(|&&m| m >= n) {
        return Err(Error::Input(format!("medoid index {bad} out of range")));
    }
    let mut sorted = medoids.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Input("duplicate medoid indices".into()));
    }
    let labels = (0..n).map(|i| nearest_slot(dist, medoids, i).0).collect();
    Partition::from_compact(labels, k)
}

/// `(slot, distance)` of the medoid nearest to `i` under the tie rule of
/// [`assign_to_medoids`].
pub(crate) fn nearest_slot(dist: &DistanceMatrix, medoids: &[usize], i: usize) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    let mut best_key = (f64::INFINITY, 2u8, usize::MAX);
    for (slot, &m) in medoids.iter().enumerate() {
        let key = (dist.get(i, m), (m != i) as u8, m);
        if key < best_key {
            best_key = key;
            best = (slot, key.0);
        }
    }
    best
}

/// PAM: greedy BUILD followed by steepest-descent SWAP over all
/// medoid/non-medoid exchanges. Deterministic; ties go to the lowest indices.
pub fn pam(dist: &DistanceMatrix, k: usize) -> Result<PamFit> {
    let n = dist.n();
    if k < 2 || k + 1 > n {
        return Err(Error::TrivialClustering { k, n });
    }
    let build = pam_build(dist, k);
    let mut medoids = build.clone();
    let mut near = nearest_two(dist, &medoids);
    let mut cost: f64 = near.iter().map(|x| x.d1).sum();
    let mut trace = vec![cost];
    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..k {
            for o in 0..n {
                if is_medoid[o] {
                    continue;
                }
                let delta = swap_delta(dist, &near, slot, o);
                if best.is_none_or(|(bd, _, _)| delta < bd) {
                    best = Some((delta, slot, o));
                }
            }
        }
        let Some((delta, slot, o)) = best else { break };
        if delta >= -1e-12 * cost.max(1.0) {
            break;
        }
        is_medoid[medoids[slot]] = false;
        is_medoid[o] = true;
        medoids[slot] = o;
        near = nearest_two(dist, &medoids);
        let new_cost: f64 = near.iter().map(|x| x.d1).sum();
        if new_cost >= cost {
            break;
        }
        cost = new_cost;
        trace.push(cost);
    }
    medoids.sort_unstable();
    let partition = assign_to_medoids(dist, &medoids)?;
    Ok(PamFit { medoids, partition, cost, build, trace })
}

fn pam_build(dist: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = dist.n();
    let first = (0..n)
        .map(|i| (dist.row(i).iter().sum::<f64>(), i))
        .fold((f64::INFINITY, 0), |b, c| if c.0 < b.0 { c } else { b })
        .1;
    let mut medoids = vec![first];
    let mut dmin: Vec<f64> = dist.row(first).to_vec();
    while medoids.len() < k {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for c in 0..n {
            if medoids.contains(&c) {
                continue;
            }
            let gain: f64 = (0..n).map(|j| (dmin[j] - dist.get(j, c)).max(0.0)).sum();
            if gain > best.0 {
                best = (gain, c);
            }
        }
        medoids.push(best.1);
        for (j, d) in dmin.iter_mut().enumerate() {
            *d = d.min(dist.get(j, best.1));
        }
    }
    medoids
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Nearest {
    pub slot: usize,
    pub d1: f64,
    pub d2: f64,
}

pub(crate) fn nearest_two(dist: &DistanceMatrix, medoids: &[usize]) -> Vec<Nearest> {
    (0..dist.n())
        .map(|i| {
            let (slot, d1) = nearest_slot(dist, medoids, i);
            let d2 = medoids
                .iter()
                .enumerate()
                .filter(|&(s, _)| s != slot)
                .map(|(_, &m)| dist.get(i, m))
                .fold(f64::INFINITY, f64::min);
            Nearest { slot, d1, d2 }
        })
        .collect()
}

/// Change in total cost when the medoid in `slot` is replaced by `o`.
fn swap_delta(dist: &DistanceMatrix, near: &[Nearest], slot: usize, o: usize) -> f64 {
    let row = dist.row(o);
    near.iter()
        .zip(row)
        .map(|(x, &dio)| {
            if x.slot == slot {
                dio.min(x.d2) - x.d1
            } else {
                (dio - x.d1).min(0.0)
            }
        })
        .sum()
}
