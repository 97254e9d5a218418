//! Silhouette widths, the average silhouette width (ASW), and an incremental
//! cache that prices single-object relabel moves in `O(n)`.
//!
//! Conventions: an object alone in its cluster has silhouette 0, and so does
//! an object whose `max(a, b)` is 0.

use thiserror::Error;

use crate::geometry::{DistanceMatrix, Partition};

/// Applied moves between two from-scratch rebuilds of the row sums.
pub const REBUILD_INTERVAL: usize = 256;

/// Silhouette of one object given its mean within-cluster dissimilarity `a`
/// and nearest-other-cluster mean `b`.
#[inline]
pub fn silhouette_value(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m > 0.0 {
        (b - a) / m
    } else {
        0.0
    }
}

/// Silhouette width of object `i`, computed directly from the distances.
pub fn point_silhouette(i: usize, part: &Partition, dist: &DistanceMatrix) -> f64 {
    let k = part.k();
    let sizes = part.sizes();
    let own = part.label(i);
    if sizes[own] < 2 {
        return 0.0;
    }
    let mut sums = vec![0.0; k];
    for (h, &l) in part.labels().iter().enumerate() {
        sums[l] += dist.get(i, h);
    }
    let a = sums[own] / (sizes[own] - 1) as f64;
    let b = (0..k)
        .filter(|&r| r != own)
        .map(|r| sums[r] / sizes[r] as f64)
        .fold(f64::INFINITY, f64::min);
    silhouette_value(a, b)
}

/// All silhouette widths, by direct `O(n^2)` evaluation.
pub fn silhouette_widths(part: &Partition, dist: &DistanceMatrix) -> Vec<f64> {
    (0..part.n()).map(|i| point_silhouette(i, part, dist)).collect()
}

/// Average silhouette width of a partition.
pub fn asw(part: &Partition, dist: &DistanceMatrix) -> f64 {
    silhouette_widths(part, dist).iter().sum::<f64>() / part.n() as f64
}

/// Why a candidate move cannot be evaluated.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum MoveError {
    #[error("object {0} is already in cluster {1}")]
    SameCluster(usize, usize),
    #[error("moving object {0} would empty its cluster")]
    WouldEmpty(usize),
    #[error("cluster id {0} out of range")]
    BadCluster(usize),
    #[error("object index {0} out of range")]
    BadObject(usize),
}

const TOP: usize = 3;

/// Per-object, per-cluster dissimilarity sums plus the silhouette state
/// derived from them.
///
/// `rowsum[i][r]` sums `d(i, h)` over members `h` of cluster `r`, including
/// `d(i, i) = 0` for the object's own cluster. For every object the three
/// smallest other-cluster means are kept so that a move touching two
/// clusters can re-derive `b(j)` in constant time.
#[derive(Debug, Clone)]
pub struct SilhouetteCache<'a> {
    dist: &'a DistanceMatrix,
    k: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    rowsum: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    neighbor: Vec<usize>,
    s: Vec<f64>,
    // smallest other-cluster means per object, ascending; unused slots hold
    // (INFINITY, usize::MAX)
    nearest: Vec<[(f64, usize); TOP]>,
    // object indices of each cluster, ascending
    members: Vec<Vec<usize>>,
    total: f64,
    applied_since_rebuild: usize,
}

impl<'a> SilhouetteCache<'a> {
    /// Builds the cache in `O(n^2)` time and `O(n k)` space.
    pub fn build(part: &Partition, dist: &'a DistanceMatrix) -> Self {
        assert_eq!(part.n(), dist.n(), "partition and distance matrix sizes differ");
        let n = part.n();
        let k = part.k();
        let mut cache = Self {
            dist,
            k,
            labels: part.labels().to_vec(),
            sizes: part.sizes().to_vec(),
            rowsum: vec![0.0; n * k],
            a: vec![0.0; n],
            b: vec![0.0; n],
            neighbor: vec![0; n],
            s: vec![0.0; n],
            nearest: vec![[(f64::INFINITY, usize::MAX); TOP]; n],
            members: vec![Vec::new(); k],
            total: 0.0,
            applied_since_rebuild: 0,
        };
        cache.rebuild();
        cache
    }

    /// Recomputes every field from the labels and the distances.
    pub fn rebuild(&mut self) {
        let n = self.labels.len();
        let k = self.k;
        self.rowsum.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let row = self.dist.row(i);
            let sums = &mut self.rowsum[i * k..(i + 1) * k];
            for (h, &l) in self.labels.iter().enumerate() {
                sums[l] += row[h];
            }
        }
        self.applied_since_rebuild = 0;
        self.refresh();
    }

    fn refresh(&mut self) {
        let n = self.labels.len();
        self.members.iter_mut().for_each(Vec::clear);
        for (i, &l) in self.labels.iter().enumerate() {
            self.members[l].push(i);
        }
        let mut total = 0.0;
        for i in 0..n {
            self.refresh_point(i);
            total += self.s[i];
        }
        self.total = total;
    }

    fn refresh_point(&mut self, i: usize) {
        let k = self.k;
        let own = self.labels[i];
        let sums = &self.rowsum[i * k..(i + 1) * k];
        let mut top = [(f64::INFINITY, usize::MAX); TOP];
        for r in 0..k {
            if r == own {
                continue;
            }
            insert_top(&mut top, sums[r] / self.sizes[r] as f64, r);
        }
        let a = if self.sizes[own] > 1 {
            sums[own] / (self.sizes[own] - 1) as f64
        } else {
            0.0
        };
        self.a[i] = a;
        self.b[i] = top[0].0;
        self.neighbor[i] = top[0].1;
        self.s[i] = if self.sizes[own] > 1 { silhouette_value(a, top[0].0) } else { 0.0 };
        self.nearest[i] = top;
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn rowsum(&self, i: usize, r: usize) -> f64 {
        self.rowsum[i * self.k + r]
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn neighbor(&self) -> &[usize] {
        &self.neighbor
    }

    pub fn silhouettes(&self) -> &[f64] {
        &self.s
    }

    /// Sum of all silhouette widths.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Current ASW.
    pub fn objective(&self) -> f64 {
        self.total / self.n() as f64
    }

    pub fn partition(&self) -> Partition {
        Partition::from_compact(self.labels.clone(), self.k).expect("cache keeps clusters non-empty")
    }

    fn check_move(&self, m: usize, r: usize) -> Result<usize, MoveError> {
        if m >= self.n() {
            return Err(MoveError::BadObject(m));
        }
        if r >= self.k {
            return Err(MoveError::BadCluster(r));
        }
        let p = self.labels[m];
        if p == r {
            return Err(MoveError::SameCluster(m, r));
        }
        if self.sizes[p] < 2 {
            return Err(MoveError::WouldEmpty(m));
        }
        Ok(p)
    }

    /// ASW of the partition obtained by relabeling object `m` to cluster `r`,
    /// without changing the cache. Runs in `O(n + k)`.
    ///
    /// Objects are visited cluster by cluster so each loop handles a single
    /// case of the update.
    pub fn eval_move(&self, m: usize, r: usize) -> Result<f64, MoveError> {
        let p = self.check_move(m, r)?;
        let q = r;
        let k = self.k;
        let n = self.n();
        let inv_np = 1.0 / (self.sizes[p] - 1) as f64;
        let inv_nq = 1.0 / (self.sizes[q] + 1) as f64;
        let dm = self.dist.row(m);
        let sums_of = |j: usize| &self.rowsum[j * k..(j + 1) * k];

        // m joins q, so its own cluster has sizes[q] other members
        let sums = sums_of(m);
        let a = sums[q] / self.sizes[q] as f64;
        let mut b = sums[p] * inv_np;
        for (t, &sum) in sums.iter().enumerate() {
            if t != p && t != q {
                b = b.min(sum / self.sizes[t] as f64);
            }
        }
        let mut total = silhouette_value(a, b);

        // the remaining member of a pair left behind becomes a singleton
        if self.sizes[p] > 2 {
            let inv_a = 1.0 / (self.sizes[p] - 2) as f64;
            for &j in &self.members[p] {
                if j == m {
                    continue;
                }
                let (sums, d) = (sums_of(j), dm[j]);
                let a = (sums[p] - d) * inv_a;
                let b = best_excluding(&self.nearest[j], q, q).min((sums[q] + d) * inv_nq);
                total += silhouette_value(a, b);
            }
        }

        let inv_a = 1.0 / self.sizes[q] as f64;
        for &j in &self.members[q] {
            let (sums, d) = (sums_of(j), dm[j]);
            let a = (sums[q] + d) * inv_a;
            let b = best_excluding(&self.nearest[j], p, p).min((sums[p] - d) * inv_np);
            total += silhouette_value(a, b);
        }

        for c in 0..k {
            if c == p || c == q || self.sizes[c] < 2 {
                continue;
            }
            for &j in &self.members[c] {
                let (sums, d) = (sums_of(j), dm[j]);
                let b = best_excluding(&self.nearest[j], p, q)
                    .min((sums[p] - d) * inv_np)
                    .min((sums[q] + d) * inv_nq);
                total += silhouette_value(self.a[j], b);
            }
        }
        Ok(total / n as f64)
    }

    /// Relabels object `m` to cluster `r` and updates every field in `O(n k)`.
    /// Row sums are rebuilt from scratch every [`REBUILD_INTERVAL`] moves.
    pub fn apply_move(&mut self, m: usize, r: usize) -> Result<(), MoveError> {
        let p = self.check_move(m, r)?;
        let k = self.k;
        let dm = self.dist.row(m);
        for (j, &d) in dm.iter().enumerate() {
            self.rowsum[j * k + p] -= d;
            self.rowsum[j * k + r] += d;
        }
        self.sizes[p] -= 1;
        self.sizes[r] += 1;
        self.labels[m] = r;
        self.applied_since_rebuild += 1;
        if self.applied_since_rebuild >= REBUILD_INTERVAL {
            self.rebuild();
        } else {
            self.refresh();
        }
        Ok(())
    }
}

#[inline]
fn insert_top(top: &mut [(f64, usize); TOP], v: f64, r: usize) {
    // strict comparison keeps the lower cluster id first on ties
    let mut pos = TOP;
    for (idx, slot) in top.iter().enumerate() {
        if v < slot.0 {
            pos = idx;
            break;
        }
    }
    if pos == TOP {
        return;
    }
    for idx in (pos + 1..TOP).rev() {
        top[idx] = top[idx - 1];
    }
    top[pos] = (v, r);
}

#[inline]
fn best_excluding(top: &[(f64, usize); TOP], x: usize, y: usize) -> f64 {
    top.iter()
        .find(|(_, r)| *r != x && *r != y)
        .map_or(f64::INFINITY, |(v, _)| *v)
}
