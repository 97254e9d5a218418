//! Simulation campaigns: replicate datasets from the benchmark models, run
//! every configured method at the true `k` and/or with `k` estimated, and
//! collect one record per run.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use osil::datagen::{generate, ModelSpec};
use osil::rng::derive_seed;
use osil::validation::{estimate_k, ScanConfig};
use osil::{
    adjusted_rand_index, asw, initialize, osil, pairwise_distances, pamsil, DataSet, DistanceMatrix,
    InitMethod, KMethod, Metric, OsilConfig, PamsilConfig,
};

use crate::error::{CliError, CliResult};
use crate::SCHEMA_VERSION;

/// A method as named in configs and records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    /// A clusterer on its own; in the estimate regime `k` maximizes its ASW.
    Init(InitMethod),
    /// OSil seeded by a clusterer.
    Osil(InitMethod),
    Pamsil,
    /// Calinski-Harabasz selection of `k`; estimate regime only.
    Ch(InitMethod),
}

impl Method {
    /// The column a method occupies in the summary tables.
    pub fn column(&self) -> String {
        match self {
            Method::Init(m) | Method::Osil(m) | Method::Ch(m) => m.to_string(),
            Method::Pamsil => "pamsil".into(),
        }
    }

    fn k_method(&self) -> KMethod {
        match self {
            Method::Init(m) => KMethod::Asw(m.clone()),
            Method::Osil(m) => KMethod::Osil(m.clone()),
            Method::Pamsil => KMethod::Pamsil,
            Method::Ch(m) => KMethod::Ch(m.clone()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Init(m) => write!(f, "{m}"),
            Method::Osil(m) => write!(f, "osil:{m}"),
            Method::Pamsil => f.write_str("pamsil"),
            Method::Ch(m) => write!(f, "ch:{m}"),
        }
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let init = |t: &str| t.parse::<InitMethod>().map_err(|e| CliError::Usage(e.to_string()));
        if s == "pamsil" {
            return Ok(Method::Pamsil);
        }
        if let Some(rest) = s.strip_prefix("osil:") {
            return Ok(Method::Osil(init(rest)?));
        }
        if let Some(rest) = s.strip_prefix("ch:") {
            return Ok(Method::Ch(init(rest)?));
        }
        match init(s)? {
            InitMethod::External(_) => Err(CliError::Usage("label files cannot be used in campaigns".into())),
            m => Ok(Method::Init(m)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Cluster at the true number of clusters.
    Fixed,
    /// Choose `k` in `2..=kmax`.
    Estimate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Fixed => "fixed",
            Regime::Estimate => "estimate",
        })
    }
}

fn default_replicates() -> usize {
    25
}

fn default_kmax() -> usize {
    12
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("osil-out")
}

fn default_regimes() -> Vec<Regime> {
    vec![Regime::Fixed, Regime::Estimate]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub models: Vec<u8>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Largest `k` scanned in the estimate regime.
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    pub methods: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<Regime>,
    /// Worker threads; `OSIL_THREADS` and `--threads` take precedence.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    /// Checks the invariants and parses the method list.
    pub fn validate(&self) -> CliResult<Vec<Method>> {
        if self.replicates == 0 {
            return Err(CliError::Usage("replicates must be at least 1".into()));
        }
        if self.kmax < 2 {
            return Err(CliError::Usage("kmax must be at least 2".into()));
        }
        if self.models.is_empty() || self.methods.is_empty() || self.regimes.is_empty() {
            return Err(CliError::Usage("models, methods and regimes must be non-empty".into()));
        }
        for &m in &self.models {
            ModelSpec::new(m)?;
        }
        self.methods.iter().map(|m| m.parse()).collect()
    }
}

/// One method run on one dataset.
///
/// In the fixed regime `asw` is the ASW of the clusterer (for OSil, of its
/// initialization) and `oasw` the optimized objective of OSil or PAMSIL. In
/// the estimate regime both describe the partition at the chosen `k` and
/// `score` is the selection criterion there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub model: u8,
    pub replicate: usize,
    pub regime: Regime,
    pub method: String,
    pub k_true: usize,
    pub k: Option<usize>,
    pub asw: Option<f64>,
    pub oasw: Option<f64>,
    pub ari: Option<f64>,
    pub score: Option<f64>,
    pub iterations: Option<usize>,
    pub status: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub model: u8,
    pub replicate: usize,
    pub regime: Regime,
    pub method: String,
    pub seconds: f64,
}

pub struct CampaignOutput {
    pub records: Vec<RunRecord>,
    pub timings: Vec<Timing>,
}

impl CampaignOutput {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.status != "ok").count()
    }
}

/// Seed of replicate `replicate` of model `model`.
pub fn dataset_seed(seed: u64, model: u8, replicate: usize) -> u64 {
    derive_seed(derive_seed(seed, u64::from(model)), replicate as u64)
}

struct Replicate {
    model: u8,
    replicate: usize,
    seed: u64,
    data: DataSet,
    dist: DistanceMatrix,
}

/// Runs the campaign on the current rayon pool. Output order is
/// `(model, replicate, method, regime)` regardless of scheduling.
pub fn run(config: &ExperimentConfig) -> CliResult<CampaignOutput> {
    let methods = config.validate()?;
    let mut regimes = config.regimes.clone();
    regimes.sort();
    regimes.dedup();
    let cells: Vec<(u8, usize)> = config
        .models
        .iter()
        .flat_map(|&m| (0..config.replicates).map(move |r| (m, r)))
        .collect();
    let replicates = cells
        .par_iter()
        .map(|&(model, replicate)| {
            let spec = ModelSpec::new(model)?;
            let seed = dataset_seed(config.seed, model, replicate);
            let data = generate(&spec, seed)?.data;
            let dist = pairwise_distances(&data, Metric::Euclidean);
            Ok(Replicate { model, replicate, seed, data, dist })
        })
        .collect::<osil::Result<Vec<_>>>()?;
    let mut jobs: Vec<(&Replicate, &Method, Regime)> = Vec::new();
    for rep in &replicates {
        for m in &methods {
            for &g in &regimes {
                if !(g == Regime::Fixed && matches!(m, Method::Ch(_))) {
                    jobs.push((rep, m, g));
                }
            }
        }
    }
    let results: Vec<(RunRecord, Timing)> = jobs
        .par_iter()
        .map(|&(rep, method, regime)| {
            let start = Instant::now();
            let record = run_one(rep, method, regime, config.kmax);
            let timing = Timing {
                model: rep.model,
                replicate: rep.replicate,
                regime,
                method: method.to_string(),
                seconds: start.elapsed().as_secs_f64(),
            };
            (record, timing)
        })
        .collect();
    let (records, timings) = results.into_iter().unzip();
    Ok(CampaignOutput { records, timings })
}

fn run_one(rep: &Replicate, method: &Method, regime: Regime, kmax: usize) -> RunRecord {
    let truth = rep.data.truth().expect("generated data carry truth");
    let k_true = rep.data.k_true().expect("generated data carry truth");
    let mut record = RunRecord {
        schema_version: SCHEMA_VERSION,
        model: rep.model,
        replicate: rep.replicate,
        regime,
        method: method.to_string(),
        k_true,
        k: None,
        asw: None,
        oasw: None,
        ari: None,
        score: None,
        iterations: None,
        status: "ok".into(),
        error: String::new(),
    };
    // every method on a replicate shares one seed, so `kmeans` and
    // `osil:kmeans` start from the same clustering
    let seed = derive_seed(rep.seed, 1);
    let outcome: osil::Result<()> = (|| {
        match regime {
            Regime::Fixed => {
                let k = k_true;
                record.k = Some(k);
                let part = match method {
                    Method::Init(m) => {
                        let p = initialize(m, &rep.dist, Some(&rep.data), k, seed)?;
                        record.asw = Some(asw(&p, &rep.dist));
                        record.score = record.asw;
                        p
                    }
                    Method::Osil(m) => {
                        let init = initialize(m, &rep.dist, Some(&rep.data), k, seed)?;
                        let r = osil(&rep.dist, k, &init, OsilConfig::default())?;
                        record.asw = Some(r.init_objective);
                        record.oasw = Some(r.objective);
                        record.score = Some(r.objective);
                        record.iterations = Some(r.iterations);
                        r.partition
                    }
                    Method::Pamsil => {
                        let r = pamsil(&rep.dist, k, PamsilConfig::default())?;
                        record.oasw = Some(r.objective);
                        record.score = Some(r.objective);
                        record.iterations = Some(r.iterations);
                        r.partition
                    }
                    Method::Ch(_) => unreachable!("filtered out of the fixed regime"),
                };
                record.ari = Some(adjusted_rand_index(part.labels(), truth)?);
            }
            Regime::Estimate => {
                let kmax = kmax.min(rep.data.n() - 1);
                let est = estimate_k(
                    &rep.dist,
                    Some(&rep.data),
                    &method.k_method(),
                    2,
                    kmax,
                    seed,
                    ScanConfig::default(),
                )?;
                let chosen = &est.chosen;
                let value = asw(chosen, &rep.dist);
                record.k = Some(est.chosen_k);
                record.asw = Some(value);
                if matches!(method, Method::Osil(_) | Method::Pamsil) {
                    record.oasw = Some(value);
                }
                record.score = est.scanned.iter().find(|s| s.k == est.chosen_k).map(|s| s.value);
                record.ari = Some(adjusted_rand_index(chosen.labels(), truth)?);
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        record.status = "error".into();
        record.error = e.to_string();
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_strings_round_trip() {
        for s in ["pam", "kmeans", "ward", "osil:pam", "osil:single", "pamsil", "ch:kmeans"] {
            assert_eq!(s.parse::<Method>().unwrap().to_string(), s);
        }
        for bad in ["osil", "osil:foo", "spectral", "file:x.txt"] {
            assert!(matches!(bad.parse::<Method>(), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = ExperimentConfig::from_json(r#"{"models": [1], "methods": ["pam"]}"#).unwrap();
        assert_eq!((c.replicates, c.kmax, c.seed), (25, 12, 0));
        assert_eq!(c.regimes, vec![Regime::Fixed, Regime::Estimate]);
        c.validate().unwrap();
        for bad in [
            r#"{"models": [1], "methods": ["pam"], "replicates": 0}"#,
            r#"{"models": [1], "methods": ["pam"], "kmax": 1}"#,
            r#"{"models": [12], "methods": ["pam"]}"#,
            r#"{"models": [1], "methods": ["nope"]}"#,
        ] {
            let c = ExperimentConfig::from_json(bad).unwrap();
            assert!(matches!(c.validate(), Err(CliError::Usage(_))), "{bad}");
        }
        assert!(ExperimentConfig::from_json(r#"{"models": [1], "methods": [], "extra": 1}"#).is_err());
    }

    #[test]
    fn small_campaign_records() {
        let c = ExperimentConfig {
            models: vec![1],
            replicates: 2,
            kmax: 4,
            methods: vec!["pam".into(), "osil:pam".into(), "pamsil".into(), "ch:kmeans".into()],
            seed: 3,
            output_dir: PathBuf::new(),
            regimes: vec![Regime::Estimate, Regime::Fixed],
            threads: None,
        };
        let out = run(&c).unwrap();
        // ch runs only in the estimate regime
        assert_eq!(out.records.len(), 2 * (3 * 2 + 1));
        assert_eq!(out.failed(), 0);
        let fixed: Vec<&RunRecord> = out.records.iter().filter(|r| r.regime == Regime::Fixed).collect();
        let pam = fixed.iter().find(|r| r.method == "pam" && r.replicate == 0).unwrap();
        let opt = fixed.iter().find(|r| r.method == "osil:pam" && r.replicate == 0).unwrap();
        assert_eq!(pam.asw, opt.asw);
        assert!(opt.oasw.unwrap() >= opt.asw.unwrap());
        assert_eq!(out.records[0].regime, Regime::Fixed);
        assert_eq!(out.records[1].regime, Regime::Estimate);
    }
}
