//! `gnpx`: sample random graphs, compute common-neighbor extremes, evaluate
//! the normalizing constants and binomial tails, and run Monte Carlo
//! experiments.
//!
//! Every subcommand echoes its resolved configuration as one JSON line on
//! stderr. Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use gnpx_core::binomial::{
    binom_tail, chernoff_tail_bound, deviation_threshold, deviation_x, tail_approx, tail_validity, TailValidity,
};
use gnpx_core::extremes::{count_exceedances, top_m_common_neighbors};
use gnpx_core::limits::{check_conditions, gamma_ell, lambda_for, normalization};
use gnpx_core::montecarlo::{run_experiment_with_progress, uniform_grid, write_cdf_csv, write_trials_csv};
use gnpx_core::{
    json, BinomialParams, ConditionReport, ExperimentConfig, Graph, JansonReport, NormalizationParams, TailComparison,
    Threads,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "gnpx", version, about = "Extremes of common-neighbor counts in G(n, p)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, p) and write it as an edge list.
    Sample(SampleArgs),
    /// Largest common-neighbor counts over k-sets.
    Max(MaxArgs),
    /// Count k-sets whose common neighborhood exceeds a threshold.
    Exceed(ExceedArgs),
    /// Normalizing constants, regime conditions and the Janson reference.
    Limits(LimitsArgs),
    /// Exact binomial upper tail against its Gaussian approximation.
    Tail(TailArgs),
    /// Monte Carlo experiment on the normalized maxima.
    Experiment(ExperimentArgs),
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

type CliResult<T> = std::result::Result<T, Failure>;

impl From<gnpx_core::Error> for Failure {
    fn from(e: gnpx_core::Error) -> Self {
        match e {
            gnpx_core::Error::Io(_) | gnpx_core::Error::Parse { .. } => Failure::Runtime(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A graph read from an edge list or sampled from `(n, p, seed)`.
#[derive(Args, Serialize)]
struct GraphSource {
    /// Edge-list file to read instead of sampling.
    #[arg(long = "in", value_name = "PATH", conflicts_with_all = ["n", "p", "seed"])]
    input: Option<PathBuf>,
    #[arg(long, requires = "p")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl GraphSource {
    fn load(&self) -> CliResult<Graph> {
        match (&self.input, self.n, self.p) {
            (Some(path), _, _) => {
                let file = File::open(path)
                    .with_context(|| format!("opening {}", path.display()))
                    .map_err(runtime)?;
                Graph::read_edge_list(BufReader::new(file))
                    .with_context(|| format!("reading {}", path.display()))
                    .map_err(runtime)
            }
            (None, Some(n), Some(p)) => Ok(Graph::sample_gnp(n, p, self.seed.unwrap_or(0))?),
            _ => Err(usage("give either --in PATH or --n and --p")),
        }
    }
}

#[derive(Args, Serialize)]
struct MaxArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExceedArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    k: usize,
    /// Count k-sets with strictly more common neighbors than this.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "gamma")]
    threshold: Option<f64>,
    /// Use the Γ_k cutoff for the sampling parameters as the threshold.
    #[arg(long)]
    gamma: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct LimitsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TailArgs {
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    q: f64,
    /// Evaluate `P(ξ > threshold)`.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "x", conflicts_with = "x")]
    threshold: Option<f64>,
    /// Evaluate at `threshold = trials·q + x sqrt(trials q (1-q) ln nlog)`.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// The `N` inside the logarithm; defaults to `trials`.
    #[arg(long)]
    nlog: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    /// Flat JSON file with `ExperimentConfig` fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "seed")]
    master_seed: Option<u64>,
    /// `lo:hi:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    y_grid: Option<String>,
    /// Worker threads, or `auto`.
    #[arg(long, env = "GNPX_THREADS")]
    threads: Option<String>,
    /// Summary JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV table `y,empirical,gumbel,janson`.
    #[arg(long)]
    cdf_csv: Option<PathBuf>,
    /// CSV of per-trial maxima.
    #[arg(long)]
    trials_csv: Option<PathBuf>,
    /// Log a line to stderr every this many finished trials (0 disables).
    #[arg(long, default_value_t = 0)]
    progress: usize,
}

fn echo<T: Serialize>(name: &str, config: &T) {
    let line = serde_json::to_string(config).expect("config serializes");
    eprintln!("gnpx {name}: {line}");
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(runtime)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = json::to_string(value).map_err(runtime)?;
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes()).map_err(runtime)?;
            w.flush().map_err(runtime)
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(runtime)?;
            stdout.flush().map_err(runtime)
        }
    }
}

fn cmd_sample(args: &SampleArgs) -> CliResult<()> {
    echo("sample", args);
    let g = Graph::sample_gnp(args.n, args.p, args.seed)?;
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    write_text(std::str::from_utf8(&buf).expect("edge list is ASCII"), args.out.as_deref())
}

fn cmd_max(args: &MaxArgs) -> CliResult<()> {
    echo("max", args);
    let g = args.source.load()?;
    let top = top_m_common_neighbors(&g, args.k, args.m)?;
    emit_json(&top, args.out.as_deref())
}

fn cmd_exceed(args: &ExceedArgs) -> CliResult<()> {
    echo("exceed", args);
    let threshold = match (args.threshold, args.gamma) {
        (Some(t), false) => t,
        (None, true) => match (args.source.n, args.source.p) {
            (Some(n), Some(p)) => gamma_ell(n as u64, p, args.k as u32)?,
            _ => return Err(usage("--gamma needs --n and --p")),
        },
        _ => return Err(usage("give exactly one of --threshold or --gamma")),
    };
    let g = args.source.load()?;
    let count = count_exceedances(&g, args.k, threshold)?;
    emit_json(&count, args.out.as_deref())
}

#[derive(Serialize)]
struct LimitsOutput {
    normalization: NormalizationParams,
    /// Absent when `n` is too small for the ratios to be defined.
    conditions: Option<ConditionReport>,
    janson: JansonReport,
}

fn cmd_limits(args: &LimitsArgs) -> CliResult<()> {
    echo("limits", args);
    let params = normalization(args.n, args.p, args.k)?;
    let conditions = check_conditions(args.n, args.p, args.k).ok();
    let janson = lambda_for(&params, args.y)?;
    emit_json(
        &LimitsOutput {
            normalization: params,
            conditions,
            janson,
        },
        args.out.as_deref(),
    )
}

#[derive(Serialize)]
struct TailOutput {
    threshold: f64,
    x: f64,
    nlog: u64,
    exact: f64,
    approx: Option<f64>,
    chernoff: Option<f64>,
    rel_error: Option<f64>,
    validity: Option<TailValidity>,
}

fn cmd_tail(args: &TailArgs) -> CliResult<()> {
    echo("tail", args);
    let bp = BinomialParams::new(args.trials, args.q)?;
    let nlog = args.nlog.unwrap_or(args.trials);
    if nlog < 2 {
        return Err(usage("--nlog (or --trials) must be at least 2"));
    }
    let (threshold, x) = match (args.threshold, args.x) {
        (Some(t), None) => (t, deviation_x(bp, t, nlog)),
        (None, Some(x)) => (deviation_threshold(bp, x, nlog), x),
        _ => return Err(usage("give exactly one of --threshold or --x")),
    };
    let exact = binom_tail(bp, threshold);
    let approx = (x > 0.0).then(|| tail_approx(bp, x, nlog)).transpose()?;
    let deviation = threshold - bp.mean();
    let chernoff = (deviation >= 0.0)
        .then(|| chernoff_tail_bound(bp, deviation))
        .transpose()?;
    emit_json(
        &TailOutput {
            threshold,
            x,
            nlog,
            exact,
            approx,
            chernoff,
            rel_error: approx.and_then(|a| TailComparison::new(exact, a).rel_error),
            validity: (x > 0.0).then(|| tail_validity(bp, x, nlog)),
        },
        args.out.as_deref(),
    )
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("bad number {s:?} in --y-grid")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => Ok(uniform_grid(number(lo)?, number(hi)?, number(step)?)?),
        [_] => spec.split(',').map(number).collect(),
        _ => Err(usage(format!("--y-grid {spec:?} is neither lo:hi:step nor a list"))),
    }
}

fn resolve_config(args: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let mut value = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(runtime)?;
            serde_json::from_str::<serde_json::Value>(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::Usage)?
        }
        None => serde_json::json!({}),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| usage("config file must hold a JSON object"))?;
    let mut set = |key: &str, v: serde_json::Value| {
        obj.insert(key.to_string(), v);
    };
    if let Some(v) = args.n {
        set("n", v.into());
    }
    if let Some(v) = args.p {
        set("p", v.into());
    }
    if let Some(v) = args.k {
        set("k", v.into());
    }
    if let Some(v) = args.m {
        set("m", v.into());
    }
    if let Some(v) = args.trials {
        set("trials", v.into());
    }
    if let Some(v) = args.master_seed {
        set("master_seed", v.into());
    }
    if let Some(spec) = &args.y_grid {
        set("y_grid", parse_grid(spec)?.into());
    }
    if let Some(t) = &args.threads {
        let threads: Threads = t.parse()?;
        set("threads", serde_json::to_value(threads).expect("threads serialize"));
    }
    obj.entry("m").or_insert(1.into());
    obj.entry("master_seed").or_insert(0.into());
    obj.entry("y_grid")
        .or_insert_with(|| ExperimentConfig::default_grid().into());
    let cfg: ExperimentConfig = serde_json::from_value(value)
        .context("incomplete or invalid experiment configuration")
        .map_err(Failure::Usage)?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    let cfg = resolve_config(args)?;
    echo("experiment", &cfg);
    let every = args.progress;
    let total = cfg.trials;
    let progress = move |done: usize| {
        if every > 0 && (done.is_multiple_of(every) || done == total) {
            eprintln!("gnpx experiment: {done}/{total} trials");
        }
    };
    let run = run_experiment_with_progress(&cfg, &progress)?;
    if let Some(path) = &args.cdf_csv {
        write_cdf_csv(&run.summary, create(path)?).map_err(runtime)?;
    }
    if let Some(path) = &args.trials_csv {
        write_trials_csv(&run.records, cfg.m, create(path)?).map_err(runtime)?;
    }
    emit_json(&run.summary, args.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Max(a) => cmd_max(a),
        Command::Exceed(a) => cmd_exceed(a),
        Command::Limits(a) => cmd_limits(a),
        Command::Tail(a) => cmd_tail(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("gnpx: error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("gnpx: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
