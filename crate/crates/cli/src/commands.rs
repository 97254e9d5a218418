use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use osil::datagen::{generate, ModelSpec};
use osil::init::pam;
use osil::validation::ScanConfig;
use osil::{
    asw, estimate_k, initialize, osil, pairwise_distances, pamsil, DataSet, DistanceMatrix, InitMethod,
    KMethod, Metric, OsilConfig, PamsilConfig,
};

use crate::campaign::{self, ExperimentConfig};
use crate::error::{io_error, CliError, CliResult};
use crate::io::{read_dataset, read_distances, write_dataset, write_labels, write_text};
use crate::report::{self, Table};
use crate::SCHEMA_VERSION;

#[derive(Debug, Parser)]
#[command(name = "osil", version, about = "Clustering by maximizing the average silhouette width")]
pub struct Cli {
    /// Worker threads (overrides OSIL_THREADS and the config file).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster one dataset with a fixed number of clusters.
    Cluster(ClusterArgs),
    /// Choose the number of clusters by scanning k.
    EstimateK(EstimateArgs),
    /// Run a simulation campaign from a JSON config.
    Simulate(SimulateArgs),
    /// Summarize campaign records as a table.
    Report(ReportArgs),
    /// Write one dataset drawn from a benchmark model.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Observations as CSV; a `label` column is taken as ground truth.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Square dissimilarity matrix as CSV.
    #[arg(long)]
    pub dist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub k: usize,
    /// osil, pamsil, kmeans, pam, or a linkage name.
    #[arg(long, default_value = "osil")]
    pub method: String,
    /// Initialization for osil: kmeans, pam, a linkage, or file:<labels>.
    #[arg(long, default_value = "pam")]
    pub init: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// euclidean, squared-euclidean or manhattan.
    #[arg(long, default_value = "euclidean")]
    pub metric: String,
    /// Directory for labels.csv and summary.json; the summary goes to stdout
    /// when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: Input,
    /// osil:<init>, asw:<init>, ch:<init> or pamsil.
    #[arg(long, default_value = "osil:pam")]
    pub method: String,
    #[arg(long, default_value_t = 2)]
    pub kmin: usize,
    #[arg(long, default_value_t = 12)]
    pub kmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "euclidean")]
    pub metric: String,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON experiment config.
    pub config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// records.csv written by `simulate`.
    pub records: PathBuf,
    /// asw, ari or kfreq.
    #[arg(long, default_value = "asw")]
    pub table: String,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model id, 1 to 9.
    #[arg(long)]
    pub model: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Worker count: the flag, then `OSIL_THREADS`, then the config value.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>, config: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Some(v) = env.filter(|v| !v.trim().is_empty()) {
        return v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("OSIL_THREADS must be a positive integer, got '{v}'")));
    }
    Ok(config)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("thread count must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let env = std::env::var("OSIL_THREADS").ok();
    match cli.command {
        Command::Simulate(args) => {
            let text = std::fs::read_to_string(&args.config).map_err(|e| io_error(&args.config, e))?;
            let mut config = ExperimentConfig::from_json(&text)?;
            if let Some(out) = args.out {
                config.output_dir = out;
            }
            let threads = resolve_threads(cli.threads, env.as_deref(), config.threads)?;
            with_pool(threads, || simulate(&config))?
        }
        command => {
            let threads = resolve_threads(cli.threads, env.as_deref(), None)?;
            with_pool(threads, || match command {
                Command::Cluster(a) => cluster(&a),
                Command::EstimateK(a) => estimate(&a),
                Command::Report(a) => report_cmd(&a),
                Command::Generate(a) => generate_cmd(&a),
                Command::Simulate(_) => unreachable!("handled above"),
            })?
        }
    }
}

struct Loaded {
    data: Option<DataSet>,
    dist: DistanceMatrix,
}

fn load(input: &Input, metric: &str) -> CliResult<Loaded> {
    let metric: Metric = metric.parse().map_err(|e: osil::Error| CliError::Usage(e.to_string()))?;
    match (&input.data, &input.dist) {
        (Some(path), None) => {
            let data = read_dataset(path)?;
            let dist = pairwise_distances(&data, metric);
            Ok(Loaded { data: Some(data), dist })
        }
        (None, Some(path)) => Ok(Loaded { data: None, dist: read_distances(path)? }),
        _ => Err(CliError::Usage("give exactly one of --data or --dist".into())),
    }
}

fn parse_init(s: &str) -> CliResult<InitMethod> {
    s.parse().map_err(|e: osil::Error| CliError::Usage(e.to_string()))
}

#[derive(Debug, Serialize)]
struct ClusterSummary {
    schema_version: u32,
    method: String,
    init: Option<String>,
    k: usize,
    n: usize,
    asw: f64,
    init_asw: f64,
    iterations: usize,
    trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    medoids: Option<Vec<usize>>,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cluster(args: &ClusterArgs) -> CliResult<()> {
    let method = args.method.as_str();
    // validate the method before touching the input
    let standalone = match method {
        "osil" | "pamsil" => None,
        other => Some(parse_init(other)?),
    };
    let init_method = if method == "osil" { Some(parse_init(&args.init)?) } else { None };
    let Loaded { data, dist } = load(&args.input, &args.metric)?;
    let k = args.k;
    let (part, summary) = match (method, standalone) {
        ("osil", _) => {
            let init_method = init_method.expect("parsed above");
            let init = initialize(&init_method, &dist, data.as_ref(), k, args.seed)?;
            let r = osil(&dist, k, &init, OsilConfig::default())?;
            let summary = ClusterSummary {
                schema_version: SCHEMA_VERSION,
                method: "osil".into(),
                init: Some(init_method.to_string()),
                k,
                n: dist.n(),
                asw: r.objective,
                init_asw: r.init_objective,
                iterations: r.iterations,
                trace: r.trace,
                medoids: None,
            };
            (r.partition, summary)
        }
        ("pamsil", _) => {
            let r = pamsil(&dist, k, PamsilConfig::default())?;
            let init_asw = asw(&pam(&dist, k)?.partition, &dist);
            let summary = ClusterSummary {
                schema_version: SCHEMA_VERSION,
                method: "pamsil".into(),
                init: Some("pam".into()),
                k,
                n: dist.n(),
                asw: r.objective,
                init_asw,
                iterations: r.iterations,
                trace: r.trace,
                medoids: Some(r.medoids.iter().map(|m| m + 1).collect()),
            };
            (r.partition, summary)
        }
        (_, Some(m)) => {
            let p = initialize(&m, &dist, data.as_ref(), k, args.seed)?;
            let v = asw(&p, &dist);
            let summary = ClusterSummary {
                schema_version: SCHEMA_VERSION,
                method: m.to_string(),
                init: None,
                k,
                n: dist.n(),
                asw: v,
                init_asw: v,
                iterations: 0,
                trace: vec![v],
                medoids: None,
            };
            (p, summary)
        }
        _ => unreachable!("method parsed above"),
    };
    match &args.out {
        Some(dir) => {
            write_labels(&dir.join("labels.csv"), &part)?;
            write_text(&dir.join("summary.json"), &to_json(&summary))
        }
        None => {
            print!("{}", to_json(&summary));
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct ScanEntry {
    k: usize,
    value: f64,
    asw: f64,
}

#[derive(Debug, Serialize)]
struct EstimateSummary {
    schema_version: u32,
    method: String,
    kmin: usize,
    kmax: usize,
    chosen_k: usize,
    labels: Vec<usize>,
    scan: Vec<ScanEntry>,
}

fn estimate(args: &EstimateArgs) -> CliResult<()> {
    let method: KMethod = args.method.parse().map_err(|e: osil::Error| CliError::Usage(e.to_string()))?;
    if args.kmin < 2 || args.kmin > args.kmax {
        return Err(CliError::Usage(format!(
            "need 2 <= kmin <= kmax, got kmin = {}, kmax = {}",
            args.kmin, args.kmax
        )));
    }
    let Loaded { data, dist } = load(&args.input, &args.metric)?;
    if args.kmax + 1 > dist.n() {
        return Err(CliError::Usage(format!("kmax = {} needs more than {} objects", args.kmax, dist.n())));
    }
    let est = estimate_k(&dist, data.as_ref(), &method, args.kmin, args.kmax, args.seed, ScanConfig::default())?;
    let summary = EstimateSummary {
        schema_version: SCHEMA_VERSION,
        method: method.to_string(),
        kmin: args.kmin,
        kmax: args.kmax,
        chosen_k: est.chosen_k,
        labels: est.chosen.one_based(),
        scan: est
            .scanned
            .iter()
            .map(|s| ScanEntry { k: s.k, value: s.value, asw: asw(&s.partition, &dist) })
            .collect(),
    };
    match &args.out {
        Some(path) => write_text(path, &to_json(&summary)),
        None => {
            print!("{}", to_json(&summary));
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct CampaignSummary {
    schema_version: u32,
    /// The config minus its output directory, which does not affect results.
    config: serde_json::Value,
    runs: usize,
    failed: usize,
    asw: Vec<report::MeanCell>,
    ari: Vec<report::MeanCell>,
    kfreq: Vec<report::KCount>,
}

/// Writes the campaign outputs into `dir`. Wall times go to `timings.csv`
/// so that every other file is reproducible byte for byte.
pub fn write_campaign(dir: &Path, config: &ExperimentConfig, out: &campaign::CampaignOutput) -> CliResult<()> {
    let records = &out.records;
    write_text(&dir.join("records.csv"), &report::records_csv(records)?)?;
    write_text(&dir.join("table_asw.csv"), &report::table_csv(records, Table::Asw)?)?;
    write_text(&dir.join("table_ari.csv"), &report::table_csv(records, Table::Ari)?)?;
    write_text(&dir.join("table_kfreq.csv"), &report::table_csv(records, Table::Kfreq)?)?;
    let mut config = serde_json::to_value(config).expect("serializable");
    if let Some(obj) = config.as_object_mut() {
        obj.remove("output_dir");
    }
    let summary = CampaignSummary {
        schema_version: SCHEMA_VERSION,
        config,
        runs: records.len(),
        failed: out.failed(),
        asw: report::mean_table(records, Table::Asw),
        ari: report::mean_table(records, Table::Ari),
        kfreq: report::kfreq_table(records),
    };
    write_text(&dir.join("summary.json"), &to_json(&summary))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in &out.timings {
        w.serialize(t).map_err(|e| CliError::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    write_text(&dir.join("timings.csv"), &String::from_utf8(bytes).expect("utf-8"))
}

fn simulate(config: &ExperimentConfig) -> CliResult<()> {
    let out = campaign::run(config)?;
    write_campaign(&config.output_dir, config, &out)?;
    let failed = out.failed();
    eprintln!(
        "{} runs, {failed} failed; results in {}",
        out.records.len(),
        config.output_dir.display()
    );
    if failed > 0 {
        return Err(CliError::Partial { failed, total: out.records.len() });
    }
    Ok(())
}

fn report_cmd(args: &ReportArgs) -> CliResult<()> {
    let table: Table = args.table.parse()?;
    let records = report::read_records(&args.records)?;
    print!("{}", report::render(&records, table));
    if let Some(path) = &args.out {
        write_text(path, &report::table_csv(&records, table)?)?;
    }
    Ok(())
}

fn generate_cmd(args: &GenerateArgs) -> CliResult<()> {
    let spec = ModelSpec::new(args.model)?;
    let g = generate(&spec, args.seed)?;
    write_dataset(&args.out, &g.data)
}
