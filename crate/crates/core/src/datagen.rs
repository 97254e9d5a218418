//! Seeded generators for the nine benchmark models, with ground-truth labels.
//!
//! Every dataset is drawn from a single ChaCha stream, so output depends only
//! on `(model, seed)`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{
    ChiSquared, Distribution, Exp, Gamma, Normal, Poisson, SkewNormal, StandardNormal, Uniform,
    Weibull,
};

use crate::error::{Error, Result};
use crate::geometry::DataSet;
use crate::rng::stream_rng;

/// A univariate distribution. Scale parameters are standard deviations or
/// distribution scales, never variances.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    /// `scale == 0` is the point mass at zero.
    Gamma { shape: f64, scale: f64 },
    NoncentralT { df: f64, ncp: f64 },
    NoncentralChiSquared { df: f64, ncp: f64 },
    NoncentralF { df1: f64, df2: f64, ncp: f64 },
    /// `X / (X + Y)` with `X ~ chi2(2a, ncp)` and `Y ~ chi2(2b)`.
    NoncentralBeta { a: f64, b: f64, ncp: f64 },
    SkewNormal { location: f64, scale: f64, shape: f64 },
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameters(msg)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be non-negative and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

/// Pre-validated sampler for a [`Family`].
#[derive(Debug, Clone)]
enum Sampler {
    Normal(Normal<f64>),
    Uniform(Uniform<f64>),
    Exp(Exp<f64>),
    Weibull(Weibull<f64>),
    Gamma(Gamma<f64>),
    Constant(f64),
    NcChi { df: f64, ncp: f64 },
    NcT { ncp: f64, df: f64, chi: ChiSquared<f64> },
    NcF { df1: f64, df2: f64, ncp: f64, chi2: ChiSquared<f64> },
    NcBeta { a: f64, ncp: f64, y: ChiSquared<f64> },
    SkewNormal(SkewNormal<f64>),
}

/// Noncentral chi-squared as a Poisson mixture of central ones, valid for any
/// `df > 0`.
fn noncentral_chi2<R: Rng + ?Sized>(df: f64, ncp: f64, rng: &mut R) -> f64 {
    let j = if ncp > 0.0 {
        Poisson::new(ncp / 2.0).expect("validated ncp").sample(rng)
    } else {
        0.0
    };
    Gamma::new((df + 2.0 * j) / 2.0, 2.0).expect("positive shape").sample(rng)
}

impl Family {
    fn sampler(&self) -> Result<Sampler> {
        Ok(match *self {
            Family::Normal { mean, sd } => {
                finite("mean", mean)?;
                non_negative("sd", sd)?;
                Sampler::Normal(Normal::new(mean, sd).map_err(|e| invalid(e.to_string()))?)
            }
            Family::Uniform { low, high } => {
                finite("low", low)?;
                finite("high", high)?;
                if low >= high {
                    return Err(invalid(format!("uniform needs low < high, got [{low}, {high}]")));
                }
                Sampler::Uniform(Uniform::new(low, high).map_err(|e| invalid(e.to_string()))?)
            }
            Family::Exponential { rate } => {
                positive("rate", rate)?;
                Sampler::Exp(Exp::new(rate).map_err(|e| invalid(e.to_string()))?)
            }
            Family::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
                Sampler::Weibull(Weibull::new(scale, shape).map_err(|e| invalid(e.to_string()))?)
            }
            Family::Gamma { shape, scale } => {
                positive("shape", shape)?;
                non_negative("scale", scale)?;
                if scale == 0.0 {
                    Sampler::Constant(0.0)
                } else {
                    Sampler::Gamma(Gamma::new(shape, scale).map_err(|e| invalid(e.to_string()))?)
                }
            }
            Family::NoncentralT { df, ncp } => {
                positive("df", df)?;
                finite("ncp", ncp)?;
                Sampler::NcT { ncp, df, chi: ChiSquared::new(df).map_err(|e| invalid(e.to_string()))? }
            }
            Family::NoncentralChiSquared { df, ncp } => {
                positive("df", df)?;
                non_negative("ncp", ncp)?;
                Sampler::NcChi { df, ncp }
            }
            Family::NoncentralF { df1, df2, ncp } => {
                positive("df1", df1)?;
                positive("df2", df2)?;
                non_negative("ncp", ncp)?;
                Sampler::NcF { df1, df2, ncp, chi2: ChiSquared::new(df2).map_err(|e| invalid(e.to_string()))? }
            }
            Family::NoncentralBeta { a, b, ncp } => {
                positive("a", a)?;
                positive("b", b)?;
                non_negative("ncp", ncp)?;
                Sampler::NcBeta { a, ncp, y: ChiSquared::new(2.0 * b).map_err(|e| invalid(e.to_string()))? }
            }
            Family::SkewNormal { location, scale, shape } => {
                finite("location", location)?;
                positive("scale", scale)?;
                finite("shape", shape)?;
                Sampler::SkewNormal(
                    SkewNormal::new(location, scale, shape).map_err(|e| invalid(e.to_string()))?,
                )
            }
        })
    }
}

impl Sampler {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Weibull(d) => d.sample(rng),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Constant(c) => *c,
            Sampler::NcChi { df, ncp } => noncentral_chi2(*df, *ncp, rng),
            Sampler::NcT { ncp, df, chi } => {
                let z: f64 = rng.sample(StandardNormal);
                (z + ncp) / (chi.sample(rng) / df).sqrt()
            }
            Sampler::NcF { df1, df2, ncp, chi2 } => {
                let x = noncentral_chi2(*df1, *ncp, rng) / df1;
                x / (chi2.sample(rng) / df2)
            }
            Sampler::NcBeta { a, ncp, y } => {
                let x = noncentral_chi2(2.0 * a, *ncp, rng);
                x / (x + y.sample(rng))
            }
            Sampler::SkewNormal(d) => d.sample(rng),
        }
    }
}

/// `n` iid draws from `family`.
pub fn sample(family: &Family, n: usize, seed: u64) -> Result<Vec<f64>> {
    let s = family.sampler()?;
    let mut rng = stream_rng(seed, 0);
    Ok((0..n).map(|_| s.draw(&mut rng)).collect())
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(cov: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let p = cov.len();
    if cov.iter().any(|r| r.len() != p) {
        return Err(invalid("covariance matrix must be square".into()));
    }
    let mut l = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = (0..j).map(|t| l[i][t] * l[j][t]).sum();
            if i == j {
                let v = cov[i][i] - s;
                if !(v > 0.0) {
                    return Err(invalid("covariance matrix is not positive definite".into()));
                }
                l[i][j] = v.sqrt();
            } else {
                if (cov[i][j] - cov[j][i]).abs() > 1e-12 * cov[i][j].abs().max(1.0) {
                    return Err(invalid("covariance matrix is not symmetric".into()));
                }
                l[i][j] = (cov[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

fn draw_mvnormal<R: Rng + ?Sized>(mean: &[f64], chol: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
    let z: Vec<f64> = (0..mean.len()).map(|_| rng.sample(StandardNormal)).collect();
    mean.iter()
        .enumerate()
        .map(|(i, m)| m + (0..=i).map(|t| chol[i][t] * z[t]).sum::<f64>())
        .collect()
}

/// `n` draws from `N(mean, cov)`.
pub fn sample_mvnormal(mean: &[f64], cov: &[Vec<f64>], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if cov.len() != mean.len() {
        return Err(Error::LengthMismatch { expected: mean.len(), got: cov.len() });
    }
    let chol = cholesky(cov)?;
    let mut rng = stream_rng(seed, 0);
    Ok((0..n).map(|_| draw_mvnormal(mean, &chol, &mut rng)).collect())
}

/// How one cluster's observations are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum ClusterSpec {
    /// Independent coordinates, one family per dimension.
    Independent(Vec<Family>),
    /// Multivariate normal.
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    /// Two independent normal coordinates; every further coordinate is the
    /// second one plus a fixed offset.
    Offset { mean: [f64; 2], sd: [f64; 2], offsets: Vec<f64> },
}

impl ClusterSpec {
    fn dim(&self) -> usize {
        match self {
            ClusterSpec::Independent(f) => f.len(),
            ClusterSpec::Gaussian { mean, .. } => mean.len(),
            ClusterSpec::Offset { offsets, .. } => 2 + offsets.len(),
        }
    }
}

/// Sizes and spreads assigned to cluster centres at generation time.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomAssignment {
    /// Every coordinate of cluster `c`'s mean equals `centres[c]`.
    pub centres: Vec<f64>,
    /// Multiset of sizes, permuted over clusters.
    pub sizes: Vec<usize>,
    /// Per-coordinate variances, drawn with replacement per cluster.
    pub variances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: u8,
    pub k_true: usize,
    pub dim: usize,
    /// Cluster sizes; for randomly assigned models, the multiset in listed order.
    pub sizes: Vec<usize>,
    /// Empty when `assignment` is set.
    pub clusters: Vec<ClusterSpec>,
    pub assignment: Option<RandomAssignment>,
    /// Parameter readings that are not evident from the distribution names.
    pub notes: Vec<String>,
}

fn n(mean: f64, sd: f64) -> Family {
    Family::Normal { mean, sd }
}

fn indep(f: Vec<Family>) -> ClusterSpec {
    ClusterSpec::Independent(f)
}

fn lower_to_full(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    let p = rows.len();
    let mut m = vec![vec![0.0; p]; p];
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

impl ModelSpec {
    pub fn new(id: u8) -> Result<Self> {
        let mut notes = Vec::new();
        let (clusters, assignment) = match id {
            1 => (vec![indep(vec![n(0.0, 0.1), n(5.0, 0.1)]), indep(vec![n(2.0, 0.7), n(5.0, 0.7)])], None),
            2 => (
                vec![
                    indep(vec![n(-2.0, 0.1), n(0.0, 0.1)]),
                    indep(vec![n(0.0, 0.7), n(0.0, 0.7)]),
                    indep(vec![n(2.0, 0.1), n(0.0, 0.1)]),
                ],
                None,
            ),
            3 => (
                vec![
                    indep(vec![
                        Family::NoncentralT { df: 7.0, ncp: 10.0 },
                        Family::NoncentralT { df: 7.0, ncp: 30.0 },
                    ]),
                    indep(vec![Family::Uniform { low: 10.0, high: 15.0 }; 2]),
                    indep(vec![n(2.0, 2.0), n(2.0, 4.0)]),
                    indep(vec![n(20.0, 1.0), n(80.0, 2.0)]),
                ],
                None,
            ),
            4 => {
                notes.push("N(m, s): s is a standard deviation".into());
                notes.push("SN(a, b, c, d): location a, scale b, slant c; d = 4 and d = 6 unused".into());
                (
                    vec![
                        indep(vec![
                            Family::NoncentralF { df1: 2.0, df2: 6.0, ncp: 4.0 },
                            Family::NoncentralF { df1: 5.0, df2: 5.0, ncp: 4.0 },
                        ]),
                        indep(vec![
                            Family::NoncentralChiSquared { df: 7.0, ncp: 35.0 },
                            Family::NoncentralChiSquared { df: 10.0, ncp: 60.0 },
                        ]),
                        indep(vec![
                            Family::Normal { mean: 100.0, sd: 2.0 },
                            Family::Normal { mean: 0.0, sd: 2.0 },
                        ]),
                        indep(vec![
                            Family::SkewNormal { location: 20.0, scale: 2.0, shape: 2.0 },
                            Family::SkewNormal { location: 200.0, scale: 2.0, shape: 3.0 },
                        ]),
                        indep(vec![
                            Family::NoncentralT { df: 40.0, ncp: 100.0 },
                            Family::NoncentralT { df: 35.0, ncp: 150.0 },
                        ]),
                    ],
                    None,
                )
            }
            5 => {
                notes.push("Exp(10): rate 10".into());
                notes.push("W(10, 4): shape 10, scale 4".into());
                notes.push("Gam(s, c): shape s, scale c; Gam(15, 0) is the point mass at 0".into());
                notes.push("SN(a, b, c, d): location a, scale b, slant c; d = 5 unused".into());
                (
                    vec![
                        indep(vec![Family::Uniform { low: -6.0, high: -2.0 }; 2]),
                        indep(vec![Family::Exponential { rate: 10.0 }; 2]),
                        indep(vec![
                            Family::NoncentralBeta { a: 2.0, b: 3.0, ncp: 220.0 },
                            Family::NoncentralBeta { a: 2.0, b: 3.0, ncp: 120.0 },
                        ]),
                        indep(vec![
                            Family::SkewNormal { location: 5.0, scale: 0.6, shape: 4.0 },
                            Family::SkewNormal { location: 0.0, scale: 0.6, shape: 4.0 },
                        ]),
                        indep(vec![Family::Weibull { shape: 10.0, scale: 4.0 }; 2]),
                        indep(vec![
                            Family::Gamma { shape: 15.0, scale: 2.0 },
                            Family::Gamma { shape: 15.0, scale: 0.0 },
                        ]),
                    ],
                    None,
                )
            }
            6 => {
                let means: [[f64; 5]; 5] = [
                    [0.0, 0.0, 0.0, 0.0, 0.0],
                    [40.0, 80.0, 15.0, 30.0, 22.0],
                    [15.0, 40.0, 40.0, 55.0, 80.0],
                    [70.0, 80.0, 70.0, 70.0, 70.0],
                    [100.0, 100.0, 100.0, 100.0, 100.0],
                ];
                let covs = model6_covariances();
                (
                    means
                        .iter()
                        .zip(covs)
                        .map(|(m, cov)| ClusterSpec::Gaussian { mean: m.to_vec(), cov })
                        .collect(),
                    None,
                )
            }
            7 => {
                notes.push("cluster 1: dims 3-6 subtract 3..12 and dims 7-10 add 3..12".into());
                let up: Vec<f64> = (1..=8).map(|j| 3.0 * j as f64).collect();
                let down: Vec<f64> = up.iter().map(|v| -v).collect();
                let first: Vec<f64> = [-3.0, -6.0, -9.0, -12.0, 3.0, 6.0, 9.0, 12.0].to_vec();
                let off = |mean: [f64; 2], sd: [f64; 2], offsets: &Vec<f64>| ClusterSpec::Offset {
                    mean,
                    sd,
                    offsets: offsets.clone(),
                };
                (
                    vec![
                        off([0.0, 5.0], [0.5, 0.2], &first),
                        off([-0.5, 3.5], [0.2, 0.1], &up),
                        off([0.0, 3.5], [0.4, 0.3], &up),
                        off([0.5, 3.5], [0.2, 0.1], &up),
                        off([-0.5, 6.5], [0.2, 0.1], &down),
                        off([0.0, 6.5], [0.3, 0.2], &down),
                        off([0.5, 6.5], [0.3, 0.2], &down),
                    ],
                    None,
                )
            }
            8 => (
                Vec::new(),
                Some(RandomAssignment {
                    centres: vec![-21.0, -18.0, -15.0, -9.0, -6.0, 6.0, 9.0, 15.0, 18.0, 21.0],
                    sizes: vec![20, 40, 60, 70, 50, 50, 50, 50, 50, 50],
                    variances: vec![0.05, 0.1, 0.15, 0.175, 0.2],
                }),
            ),
            9 => {
                notes.push("observations are genes, coordinates are 3 x 20 patients".into());
                notes.push("mean shift log10(3), standard deviation ln(1.6)".into());
                (model9_clusters(), None)
            }
            other => return Err(Error::UnsupportedModel(other)),
        };
        if matches!(id, 1 | 2 | 3 | 7) {
            notes.push("diagonal covariance entries are per-coordinate standard deviations".into());
        }
        let (k_true, dim, sizes) = match &assignment {
            Some(a) => (a.centres.len(), 500, a.sizes.clone()),
            None => {
                let sizes = if id == 9 { vec![25, 25, 25, 25, 25, 25, 350] } else { vec![50; clusters.len()] };
                (clusters.len(), clusters[0].dim(), sizes)
            }
        };
        debug_assert!(clusters.iter().all(|c| c.dim() == dim));
        Ok(Self { id, k_true, dim, sizes, clusters, assignment, notes })
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }
}

fn model6_covariances() -> Vec<Vec<Vec<f64>>> {
    vec![
        lower_to_full(&[
            &[9.0],
            &[1.0, 17.0],
            &[1.0, -1.4, 12.0],
            &[0.4, 0.6, 0.5, 2.0],
            &[-1.2, -1.6, -1.4, -0.6, 16.0],
        ]),
        lower_to_full(&[
            &[25.0],
            &[0.2, 9.0],
            &[0.2, -0.2, 16.0],
            &[-0.2, -0.2, 0.2, 1.0],
            &[-0.2, -0.2, -0.2, -0.2, 49.0],
        ]),
        lower_to_full(&[
            &[25.0],
            &[0.3, 9.0],
            &[0.3, -0.3, 16.0],
            &[-0.3, 0.3, 0.3, 1.0],
            &[-0.3, -0.3, -0.3, -0.3, 49.0],
        ]),
        lower_to_full(&[
            &[5.0],
            &[0.1, 0.9],
            &[0.1, -0.2, 1.6],
            &[-0.7, 0.2, 0.2, 1.0],
            &[-0.2, -0.9, -0.2, -0.2, 4.9],
        ]),
        lower_to_full(&[
            &[2.0],
            &[0.2, 9.0],
            &[0.2, -0.1, 3.0],
            &[-0.3, 0.2, 0.1, 1.0],
            &[-0.1, -0.1, -0.2, -0.9, 4.0],
        ]),
    ]
}

/// Gene clusters: patient group `g` shifts genes `50g+1..50g+25` up and
/// `50g+26..50g+50` down; the remaining genes form one null cluster.
fn model9_clusters() -> Vec<ClusterSpec> {
    let shift = 3f64.log10();
    let sd = 1.6f64.ln();
    let mut out = Vec::new();
    for c in 0..7 {
        let families = (0..60)
            .map(|patient| {
                let group = patient / 20;
                let mean = match c {
                    6 => 0.0,
                    _ if c / 2 == group && c % 2 == 0 => shift,
                    _ if c / 2 == group => -shift,
                    _ => 0.0,
                };
                Family::Normal { mean, sd }
            })
            .collect();
        out.push(ClusterSpec::Independent(families));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub data: DataSet,
    pub spec: ModelSpec,
    pub seed: u64,
    /// Realized cluster sizes, indexed by truth label.
    pub sizes: Vec<usize>,
}

/// Draws one dataset. Truth label `c` is the `c`-th cluster of the spec.
pub fn generate(spec: &ModelSpec, seed: u64) -> Result<GeneratedData> {
    let mut rng = stream_rng(seed, 0);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(spec.n());
    let mut truth: Vec<i64> = Vec::with_capacity(spec.n());
    let sizes = match &spec.assignment {
        Some(a) => {
            let mut sizes = a.sizes.clone();
            sizes.shuffle(&mut rng);
            let vars: Vec<f64> =
                (0..a.centres.len()).map(|_| a.variances[rng.random_range(0..a.variances.len())]).collect();
            for (c, &centre) in a.centres.iter().enumerate() {
                let d = Normal::new(centre, vars[c].sqrt()).map_err(|e| invalid(e.to_string()))?;
                for _ in 0..sizes[c] {
                    rows.push((0..spec.dim).map(|_| d.sample(&mut rng)).collect());
                    truth.push(c as i64);
                }
            }
            sizes
        }
        None => {
            for (c, (cluster, &size)) in spec.clusters.iter().zip(&spec.sizes).enumerate() {
                match cluster {
                    ClusterSpec::Independent(families) => {
                        let samplers = families.iter().map(Family::sampler).collect::<Result<Vec<_>>>()?;
                        for _ in 0..size {
                            rows.push(samplers.iter().map(|s| s.draw(&mut rng)).collect());
                        }
                    }
                    ClusterSpec::Gaussian { mean, cov } => {
                        let chol = cholesky(cov)?;
                        for _ in 0..size {
                            rows.push(draw_mvnormal(mean, &chol, &mut rng));
                        }
                    }
                    ClusterSpec::Offset { mean, sd, offsets } => {
                        let x = Normal::new(mean[0], sd[0]).map_err(|e| invalid(e.to_string()))?;
                        let y = Normal::new(mean[1], sd[1]).map_err(|e| invalid(e.to_string()))?;
                        for _ in 0..size {
                            let a = x.sample(&mut rng);
                            let b = y.sample(&mut rng);
                            let mut row = vec![a, b];
                            row.extend(offsets.iter().map(|o| b + o));
                            rows.push(row);
                        }
                    }
                }
                truth.extend(std::iter::repeat_n(c as i64, size));
            }
            spec.sizes.clone()
        }
    };
    let data = DataSet::new(rows, Some(truth))?;
    Ok(GeneratedData { data, spec: spec.clone(), seed, sizes })
}
