//! Steepest-ascent maximization of the average silhouette width over label
//! vectors (OSil), and the medoid-restricted competitor PAMSIL.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DataSet, DistanceMatrix, Partition};
use crate::init::{initialize, nearest_two, pam, InitMethod, Nearest};
use crate::silhouette::{silhouette_value, SilhouetteCache};

/// A candidate must beat the incumbent by more than this to be accepted.
/// Differences below it are rounding noise in the incremental update.
pub const IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OsilConfig {
    /// Upper bound on swap sweeps.
    pub max_iterations: usize,
}

impl Default for OsilConfig {
    fn default() -> Self {
        Self { max_iterations: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsilResult {
    pub partition: Partition,
    /// ASW of `partition`.
    pub objective: f64,
    /// Objective before the first sweep and after every accepted move.
    pub trace: Vec<f64>,
    /// Number of swap sweeps performed, including the final one that found
    /// no improving move.
    pub iterations: usize,
    pub init_objective: f64,
}

/// Best admissible single-object move as `(value, object, cluster)`.
///
/// Ties go to the lexicographically smallest `(object, cluster)`; the
/// reduction is order-independent so the result does not depend on the
/// number of worker threads.
pub fn best_move(cache: &SilhouetteCache<'_>) -> Option<(f64, usize, usize)> {
    let k = cache.k();
    (0..cache.n())
        .into_par_iter()
        .filter_map(|m| {
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..k {
                if let Ok(v) = cache.eval_move(m, r) {
                    if best.is_none_or(|b| v > b.0) {
                        best = Some((v, m, r));
                    }
                }
            }
            best
        })
        .reduce_with(pick_better)
}

fn pick_better(x: (f64, usize, usize), y: (f64, usize, usize)) -> (f64, usize, usize) {
    if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
        y
    } else {
        x
    }
}

/// Runs OSil from `init`: repeatedly applies the single relabel with the
/// largest resulting ASW while it strictly improves the objective.
pub fn osil(
    dist: &DistanceMatrix,
    k: usize,
    init: &Partition,
    config: OsilConfig,
) -> Result<OsilResult> {
    if init.n() != dist.n() {
        return Err(Error::LengthMismatch { expected: dist.n(), got: init.n() });
    }
    if init.k() != k {
        return Err(Error::Input(format!(
            "initial partition has {} clusters, expected {k}",
            init.k()
        )));
    }
    let mut cache = SilhouetteCache::build(init, dist);
    let init_objective = cache.objective();
    let mut trace = vec![init_objective];
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let current = cache.objective();
        match best_move(&cache) {
            Some((v, m, r)) if v > current + IMPROVEMENT_TOL => {
                cache.apply_move(m, r).expect("best_move returns admissible moves");
                trace.push(cache.objective());
            }
            _ => break,
        }
    }
    cache.rebuild();
    let objective = cache.objective();
    if let Some(last) = trace.last_mut() {
        *last = objective;
    }
    Ok(OsilResult {
        partition: cache.partition(),
        objective,
        trace,
        iterations,
        init_objective,
    })
}

/// OSil seeded by `method`. `data` is required only for k-means.
pub fn osil_full(
    dist: &DistanceMatrix,
    data: Option<&DataSet>,
    k: usize,
    method: &InitMethod,
    config: OsilConfig,
    seed: u64,
) -> Result<OsilResult> {
    let init = initialize(method, dist, data, k, seed)?;
    osil(dist, k, &init, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PamsilConfig {
    pub max_iterations: usize,
}

impl Default for PamsilConfig {
    fn default() -> Self {
        Self { max_iterations: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PamsilResult {
    /// Final medoids, ascending; cluster `r` belongs to `medoids[r]`.
    pub medoids: Vec<usize>,
    pub partition: Partition,
    pub objective: f64,
    /// Starting medoids (PAM's BUILD+SWAP solution), ascending.
    pub initial_medoids: Vec<usize>,
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// PAMSIL: steepest ascent over medoid/non-medoid exchanges, scoring each
/// medoid set by the ASW of its nearest-medoid assignment. Starts from the
/// PAM solution.
pub fn pamsil(dist: &DistanceMatrix, k: usize, config: PamsilConfig) -> Result<PamsilResult> {
    let n = dist.n();
    if k < 2 || k + 1 > n {
        return Err(Error::TrivialClustering { k, n });
    }
    let initial_medoids = pam(dist, k)?.medoids;
    let mut medoids = initial_medoids.clone();
    let mut state = MedoidState::new(dist, &medoids);
    let mut trace = vec![state.objective()];
    let mut iterations = 0;
    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }
    while iterations < config.max_iterations {
        iterations += 1;
        let current = state.objective();
        let candidates: Vec<(usize, usize)> = (0..k)
            .flat_map(|slot| (0..n).map(move |o| (slot, o)))
            .filter(|&(_, o)| !is_medoid[o])
            .collect();
        let best = candidates
            .par_iter()
            .map(|&(slot, o)| (state.eval_swap(&medoids, slot, o), slot, o))
            .reduce_with(|x, y| {
                // ties: smallest (removed medoid index, added object index)
                let kx = (medoids[x.1], x.2);
                let ky = (medoids[y.1], y.2);
                if y.0 > x.0 || (y.0 == x.0 && ky < kx) {
                    y
                } else {
                    x
                }
            });
        match best {
            Some((v, slot, o)) if v > current + IMPROVEMENT_TOL => {
                is_medoid[medoids[slot]] = false;
                is_medoid[o] = true;
                medoids[slot] = o;
                state = MedoidState::new(dist, &medoids);
                trace.push(state.objective());
            }
            _ => break,
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&s| medoids[s]);
    let sorted: Vec<usize> = order.iter().map(|&s| medoids[s]).collect();
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let labels = state.labels.iter().map(|&l| relabel[l]).collect();
    let partition = Partition::from_compact(labels, k)?;
    let objective = crate::silhouette::asw(&partition, dist);
    let mut initial_medoids = initial_medoids;
    initial_medoids.sort_unstable();
    Ok(PamsilResult { medoids: sorted, partition, objective, initial_medoids, trace, iterations })
}

/// Nearest-medoid assignment plus per-cluster dissimilarity sums, used to
/// score candidate swaps without a full `O(n^2)` recomputation.
struct MedoidState<'a> {
    dist: &'a DistanceMatrix,
    k: usize,
    near: Vec<Nearest>,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    rowsum: Vec<f64>,
    total: f64,
}

impl<'a> MedoidState<'a> {
    fn new(dist: &'a DistanceMatrix, medoids: &[usize]) -> Self {
        let n = dist.n();
        let k = medoids.len();
        let near = nearest_two(dist, medoids);
        let labels: Vec<usize> = near.iter().map(|x| x.slot).collect();
        let mut sizes = vec![0; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        let mut rowsum = vec![0.0; n * k];
        for i in 0..n {
            let row = dist.row(i);
            for (h, &l) in labels.iter().enumerate() {
                rowsum[i * k + l] += row[h];
            }
        }
        let total = total_silhouette(&rowsum, &labels, &sizes, k);
        Self { dist, k, near, labels, sizes, rowsum, total }
    }

    fn objective(&self) -> f64 {
        self.total / self.labels.len() as f64
    }

    /// ASW after replacing the medoid in `slot` with object `o`. The new
    /// medoid inherits the slot's cluster id.
    fn eval_swap(&self, medoids: &[usize], slot: usize, o: usize) -> f64 {
        let n = self.labels.len();
        let k = self.k;
        let mut moved: Vec<(usize, usize, usize)> = Vec::new();
        for i in 0..n {
            let cur = self.labels[i];
            let new = if i == o {
                slot
            } else if cur == slot {
                self.reassign_from_slot(medoids, slot, o, i)
            } else {
                // o captures i only if strictly preferred to its medoid
                let key_o = (self.dist.get(i, o), 1u8, o);
                let m = medoids[cur];
                let key_cur = (self.near[i].d1, (m != i) as u8, m);
                if key_o < key_cur {
                    slot
                } else {
                    cur
                }
            };
            if new != cur {
                moved.push((i, cur, new));
            }
        }
        let mut sizes = self.sizes.clone();
        for &(_, from, to) in &moved {
            sizes[from] -= 1;
            sizes[to] += 1;
        }
        if sizes.contains(&0) {
            return f64::NEG_INFINITY;
        }
        let mut labels = self.labels.clone();
        let mut rowsum = self.rowsum.clone();
        for &(h, from, to) in &moved {
            labels[h] = to;
            let row = self.dist.row(h);
            for j in 0..n {
                rowsum[j * k + from] -= row[j];
                rowsum[j * k + to] += row[j];
            }
        }
        total_silhouette(&rowsum, &labels, &sizes, k) / n as f64
    }

    /// New slot for an object currently in `slot` once that slot's medoid is
    /// replaced by `o`.
    fn reassign_from_slot(&self, medoids: &[usize], slot: usize, o: usize, i: usize) -> usize {
        let d_o = self.dist.get(i, o);
        if d_o < self.near[i].d2 {
            return slot;
        }
        let mut best = (d_o, 1u8, o);
        let mut best_slot = slot;
        for (s, &m) in medoids.iter().enumerate() {
            if s == slot {
                continue;
            }
            let key = (self.dist.get(i, m), (m != i) as u8, m);
            if key < best {
                best = key;
                best_slot = s;
            }
        }
        best_slot
    }
}

fn total_silhouette(rowsum: &[f64], labels: &[usize], sizes: &[usize], k: usize) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &own)| {
            if sizes[own] < 2 {
                return 0.0;
            }
            let sums = &rowsum[i * k..(i + 1) * k];
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&r| r != own)
                .map(|r| sums[r] / sizes[r] as f64)
                .fold(f64::INFINITY, f64::min);
            silhouette_value(a, b)
        })
        .sum()
}
