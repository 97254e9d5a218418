//! Data containers: coordinate data sets, dense dissimilarity matrices and
//! validated partitions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// An `n x p` table of finite coordinates with optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    values: Vec<f64>,
    n: usize,
    p: usize,
    truth: Option<Vec<usize>>,
}

impl DataSet {
    /// Builds a data set from row vectors. `truth`, when given, may use any
    /// integer ids; they are compacted to `0..k_true`.
    pub fn new(rows: Vec<Vec<f64>>, truth: Option<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Input(format!("need at least 2 observations, got {n}")));
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(Error::Input("observations have zero columns".into()));
        }
        let mut values = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Input(format!(
                    "row {i} has {} columns, expected {p}",
                    row.len()
                )));
            }
            if let Some(col) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col });
            }
            values.extend_from_slice(row);
        }
        let truth = match truth {
            Some(t) => {
                if t.len() != n {
                    return Err(Error::LengthMismatch { expected: n, got: t.len() });
                }
                Some(compact_labels(&t).0)
            }
            None => None,
        };
        Ok(Self { values, n, p, truth })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    /// Ground-truth labels in `0..k_true`, if known.
    pub fn truth(&self) -> Option<&[usize]> {
        self.truth.as_deref()
    }

    pub fn k_true(&self) -> Option<usize> {
        self.truth
            .as_ref()
            .map(|t| t.iter().copied().max().map_or(0, |m| m + 1))
    }
}

/// Dissimilarity used to derive a [`DistanceMatrix`] from coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    SquaredEuclidean,
    Manhattan,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "squared-euclidean" | "sqeuclidean" => Ok(Metric::SquaredEuclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::Input(format!("unknown metric '{other}'"))),
        }
    }
}

impl Metric {
    fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => squared(x, y).sqrt(),
            Metric::SquaredEuclidean => squared(x, y),
            Metric::Manhattan => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
        }
    }
}

fn squared(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Symmetric, zero-diagonal, non-negative dissimilarities stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates a full square matrix. Symmetry is checked exactly.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Input(format!("distance matrix needs n >= 2, got {n}")));
        }
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Input(format!(
                    "distance matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(col) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col });
            }
            d.extend_from_slice(row);
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::Input(format!("non-zero diagonal at {i}")));
            }
            for h in 0..i {
                let v = d[i * n + h];
                if v < 0.0 {
                    return Err(Error::Input(format!("negative dissimilarity at ({i}, {h})")));
                }
                if v != d[h * n + i] {
                    return Err(Error::Input(format!("asymmetric entry at ({i}, {h})")));
                }
            }
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, h: usize) -> f64 {
        self.d[i * self.n + h]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Returns a copy with every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, d: self.d.iter().map(|v| v * c).collect() }
    }

    /// Returns a copy with every entry squared (Ward works on this scale).
    pub fn squared(&self) -> Self {
        Self { n: self.n, d: self.d.iter().map(|v| v * v).collect() }
    }
}

/// Computes all pairwise dissimilarities. Only the upper triangle is
/// evaluated and mirrored, so the result is bitwise symmetric.
pub fn pairwise_distances(data: &DataSet, metric: Metric) -> DistanceMatrix {
    let n = data.n();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let xi = data.row(i);
        for h in (i + 1)..n {
            let v = metric.eval(xi, data.row(h));
            d[i * n + h] = v;
            d[h * n + i] = v;
        }
    }
    DistanceMatrix { n, d }
}

/// A labeling of `n` objects into `k` non-empty clusters with ids `0..k`,
/// where `2 <= k <= n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
    sizes: Vec<usize>,
}

impl Partition {
    /// Validates raw labels. Distinct ids are compacted to `0..k` in
    /// ascending order of the raw value, so `[3, 3, 7, 7]` becomes `[0, 0, 1, 1]`.
    pub fn from_raw<T: Copy + Ord>(raw: &[T]) -> Result<Self> {
        let (labels, k) = compact_labels(raw);
        Self::from_compact(labels, k)
    }

    /// Like [`Partition::from_raw`] but also checks the expected length.
    pub fn validate<T: Copy + Ord>(raw: &[T], n: usize) -> Result<Self> {
        if raw.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: raw.len() });
        }
        Self::from_raw(raw)
    }

    /// Builds a partition from labels already in `0..k` with every id used.
    pub(crate) fn from_compact(labels: Vec<usize>, k: usize) -> Result<Self> {
        let n = labels.len();
        if k < 2 || k + 1 > n {
            return Err(Error::TrivialClustering { k, n });
        }
        let mut sizes = vec![0; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        debug_assert!(sizes.iter().all(|&s| s > 0));
        Ok(Self { labels, k, sizes })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Labels as 1-based ids, the convention used in files.
    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    /// Renumbers clusters in order of first appearance.
    pub fn canonical(&self) -> Self {
        let (labels, k) = first_appearance(&self.labels);
        Self::from_compact(labels, k).expect("relabeling preserves validity")
    }
}

/// Maps distinct values to `0..k` by ascending value.
pub(crate) fn compact_labels<T: Copy + Ord>(raw: &[T]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &v in raw {
        ids.entry(v).or_insert(0usize);
    }
    for (idx, slot) in ids.values_mut().enumerate() {
        *slot = idx;
    }
    (raw.iter().map(|v| ids[v]).collect(), ids.len())
}

/// Maps distinct values to `0..k` by order of first appearance.
pub(crate) fn first_appearance(raw: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let labels = raw
        .iter()
        .map(|v| {
            let next = map.len();
            *map.entry(*v).or_insert(next)
        })
        .collect();
    (labels, map.len())
}
