//! External and internal validation (ARI, Calinski-Harabasz) and estimation
//! of the number of clusters by scanning `k`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DataSet, DistanceMatrix, Partition};
use crate::init::{agglomerative, cut_tree, initialize, Dendrogram, InitMethod};
use crate::optimizer::{osil, pamsil, OsilConfig, PamsilConfig};
use crate::rng::derive_seed;
use crate::silhouette::asw;

#[inline]
fn pairs(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Hubert-Arabie adjusted Rand index between two label vectors.
///
/// Labels may be any ids and need not satisfy the partition invariants, so
/// degenerate references (one cluster, all singletons) are accepted. When the
/// denominator vanishes the result is 1 for identical groupings and 0
/// otherwise.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    let n = a.len();
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    // sum in a fixed order so the value is independent of hash iteration
    let sorted_sum = |counts: Vec<usize>| {
        let mut counts = counts;
        counts.sort_unstable();
        counts.into_iter().map(|c| pairs(c as f64)).sum::<f64>()
    };
    let index = sorted_sum(table.values().copied().collect());
    let sum_a = sorted_sum(rows.values().copied().collect());
    let sum_b = sorted_sum(cols.values().copied().collect());
    let total = pairs(n as f64);
    let expected = if total > 0.0 { sum_a * sum_b / total } else { 0.0 };
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        let identical = table.len() == rows.len() && table.len() == cols.len();
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

/// Calinski-Harabasz index `[B / (k - 1)] / [W / (n - k)]`.
/// Returns `+inf` when the within-cluster scatter `W` is zero.
pub fn calinski_harabasz(data: &DataSet, part: &Partition) -> Result<f64> {
    if data.n() != part.n() {
        return Err(Error::LengthMismatch { expected: data.n(), got: part.n() });
    }
    let n = data.n();
    let p = data.dim();
    let k = part.k();
    let mut grand = vec![0.0; p];
    let mut means = vec![vec![0.0; p]; k];
    for (i, row) in data.rows().enumerate() {
        let c = part.label(i);
        for j in 0..p {
            grand[j] += row[j];
            means[c][j] += row[j];
        }
    }
    grand.iter_mut().for_each(|g| *g /= n as f64);
    for (c, m) in means.iter_mut().enumerate() {
        m.iter_mut().for_each(|v| *v /= part.sizes()[c] as f64);
    }
    let mut within = 0.0;
    for (i, row) in data.rows().enumerate() {
        let m = &means[part.label(i)];
        within += row.iter().zip(m).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    }
    let between: f64 = means
        .iter()
        .zip(part.sizes())
        .map(|(m, &s)| s as f64 * m.iter().zip(&grand).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
        .sum();
    if within == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
}

/// Criterion maximized over `k` when estimating the number of clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KMethod {
    /// Final OSil objective from the given initialization.
    Osil(InitMethod),
    /// ASW of the clusterer's own labels.
    Asw(InitMethod),
    /// PAMSIL objective.
    Pamsil,
    /// Calinski-Harabasz index of the clusterer's labels.
    Ch(InitMethod),
}

impl fmt::Display for KMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KMethod::Osil(m) => write!(f, "osil:{m}"),
            KMethod::Asw(m) => write!(f, "asw:{m}"),
            KMethod::Pamsil => f.write_str("pamsil"),
            KMethod::Ch(m) => write!(f, "ch:{m}"),
        }
    }
}

impl FromStr for KMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "pamsil" {
            return Ok(KMethod::Pamsil);
        }
        let (kind, init) = s
            .split_once(':')
            .ok_or_else(|| Error::Input(format!("method '{s}' must look like osil:<init>, asw:<init>, ch:<init> or pamsil")))?;
        let init: InitMethod = init.parse()?;
        match kind {
            "osil" => Ok(KMethod::Osil(init)),
            "asw" => Ok(KMethod::Asw(init)),
            "ch" => Ok(KMethod::Ch(init)),
            other => Err(Error::Input(format!("unknown criterion '{other}'"))),
        }
    }
}

impl KMethod {
    fn init(&self) -> Option<&InitMethod> {
        match self {
            KMethod::Osil(m) | KMethod::Asw(m) | KMethod::Ch(m) => Some(m),
            KMethod::Pamsil => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KScan {
    pub k: usize,
    pub value: f64,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KEstimate {
    pub scanned: Vec<KScan>,
    pub chosen_k: usize,
    pub chosen: Partition,
}

impl KEstimate {
    /// Picks the maximum criterion value; ties go to the smaller `k`.
    pub fn from_scan(mut scanned: Vec<KScan>) -> Self {
        scanned.sort_by_key(|s| s.k);
        let best = scanned
            .iter()
            .reduce(|best, cur| if cur.value > best.value { cur } else { best })
            .expect("non-empty scan");
        Self { chosen_k: best.k, chosen: best.partition.clone(), scanned: scanned.clone() }
    }
}

/// Tuning shared by every `k` in a scan.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScanConfig {
    pub osil: OsilConfig,
    pub pamsil: PamsilConfig,
}

/// Runs `method` for every `k` in `kmin..=kmax` and returns the argmax.
///
/// Hierarchical clusterers build one dendrogram and cut it at each `k`.
/// Stochastic clusterers use a seed derived from `(seed, k)`.
pub fn estimate_k(
    dist: &DistanceMatrix,
    data: Option<&DataSet>,
    method: &KMethod,
    kmin: usize,
    kmax: usize,
    seed: u64,
    config: ScanConfig,
) -> Result<KEstimate> {
    let n = dist.n();
    if kmin < 2 || kmin > kmax || kmax + 1 > n {
        return Err(Error::Input(format!(
            "need 2 <= kmin <= kmax <= n - 1, got kmin = {kmin}, kmax = {kmax}, n = {n}"
        )));
    }
    if matches!(method, KMethod::Ch(_)) && data.is_none() {
        return Err(Error::CoordinatesRequired("the Calinski-Harabasz index".into()));
    }
    if method.init().is_some_and(InitMethod::needs_coordinates) && data.is_none() {
        return Err(Error::CoordinatesRequired(method.to_string()));
    }
    let tree: Option<Dendrogram> = match method.init() {
        Some(InitMethod::Hierarchical(l)) => Some(agglomerative(dist, *l)),
        _ => None,
    };
    let scanned = (kmin..=kmax)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(seed, k as u64);
            let base = |init: &InitMethod| match &tree {
                Some(t) => cut_tree(t, k),
                None => initialize(init, dist, data, k, seed),
            };
            let (value, partition) = match method {
                KMethod::Osil(init) => {
                    let r = osil(dist, k, &base(init)?, config.osil)?;
                    (r.objective, r.partition)
                }
                KMethod::Asw(init) => {
                    let p = base(init)?;
                    (asw(&p, dist), p)
                }
                KMethod::Pamsil => {
                    let r = pamsil(dist, k, config.pamsil)?;
                    (r.objective, r.partition)
                }
                KMethod::Ch(init) => {
                    let p = base(init)?;
                    (calinski_harabasz(data.expect("checked above"), &p)?, p)
                }
            };
            Ok(KScan { k, value, partition })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KEstimate::from_scan(scanned))
}
