use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gssl::data::{self, LabelColumn, Loaded};
use gssl::harness::{
    evaluate, prepare_graph, run_experiment, spectral_basis, sweep_seed, ExperimentConfig,
    LabelBudget, Method, SigmaSpec,
};
use gssl::{curve, ErrorClass, GsslError, Result};
use gssl_core::loo::LossKind;

#[derive(Parser)]
#[command(name = "gssl", version, about = "Graph-based semi-supervised classification with leave-one-out tuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the kNN graph and print its statistics.
    Graph(GraphCmd),
    /// Plain diffusion at a fixed rate.
    Lgc(RunCmd),
    /// Fit label reliability weights, correct labels, then diffuse.
    Autol(RunCmd),
    /// Pick the diffusion rate by leave-one-out accuracy, then diffuse.
    Autod(RunCmd),
    /// Write leave-one-out curves over the rate grid for one seed.
    Sweep(SweepCmd),
    /// Score a saved classification matrix.
    Eval(EvalCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Idx,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelCol {
    Auto,
    Last,
    None,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file (CSV, or IDX images).
    #[arg(long)]
    dataset: PathBuf,
    /// Defaults to idx for `*-ubyte` files and csv otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// IDX label file matching --dataset.
    #[arg(long)]
    idx_labels: Option<PathBuf>,
    /// Where the class column of a CSV is.
    #[arg(long, value_enum, default_value = "auto")]
    label_column: LabelCol,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Kernel width.
    #[arg(long, conflicts_with = "sigma_heuristic")]
    sigma: Option<f64>,
    /// Width from the mean distance to the M-th neighbor (default when
    /// --sigma is absent).
    #[arg(long, value_name = "M", num_args = 0..=1, default_missing_value = "10")]
    sigma_heuristic: Option<usize>,
}

#[derive(Args)]
struct GraphCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value = "xent")]
    loss: LossKind,
    /// Fraction of labels flipped to a wrong class.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Total label budget.
    #[arg(long, conflicts_with = "per_class")]
    labels: Option<usize>,
    /// Labels per class (default 10 when --labels is absent).
    #[arg(long)]
    per_class: Option<usize>,
    /// Seeds as a list and/or ranges, e.g. `0,3,10..20`.
    #[arg(long, default_value = "0")]
    seeds: String,
    #[arg(long, default_value_t = 5000)]
    iters: usize,
    #[arg(long, default_value_t = 0.7)]
    lr: f64,
    /// Eigenpairs kept for rate selection.
    #[arg(long, default_value_t = 300)]
    p: usize,
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    t_max: usize,
    #[arg(long, default_value_t = 0.1)]
    distrust_threshold: f64,
    /// Rate grid in x (α = 2^(−1/x)) as `start:step:end`.
    #[arg(long, default_value = "1:0.5:20")]
    grid: String,
    /// Keep each label's own contribution when scoring rates.
    #[arg(long)]
    keep_diagonal: bool,
    /// Store spectral bases here and reuse them.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Keep loss traces and weights in the report.
    #[arg(long)]
    traces: bool,
    /// Add wall-clock time to the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RunCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Also diffuse at every rate and score the unlabeled instances.
    #[arg(long)]
    unlabeled: bool,
    /// Output prefix: writes PREFIX.removed.csv and PREFIX.kept.csv. Without
    /// it the diagonal-removed curve goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalCmd {
    #[command(flatten)]
    data: DataArgs,
    /// Classification matrix, one row per instance.
    #[arg(long)]
    scores: PathBuf,
    /// Labeled indices, whitespace or comma separated.
    #[arg(long)]
    labeled: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &DataArgs) -> Result<Loaded> {
    let is_idx = match args.format {
        Some(Format::Idx) => true,
        Some(Format::Csv) => false,
        None => args
            .dataset
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.contains("-ubyte")),
    };
    if is_idx {
        let labels = args
            .idx_labels
            .clone()
            .ok_or_else(|| GsslError::Config("IDX datasets need --idx-labels".into()))?;
        data::load_idx(&[(args.dataset.clone(), labels)])
    } else {
        let label = match args.label_column {
            LabelCol::Auto => LabelColumn::Auto,
            LabelCol::Last => LabelColumn::Last,
            LabelCol::None => LabelColumn::None,
        };
        data::load_csv(&args.dataset, label)
    }
}

fn sigma_spec(g: &GraphArgs) -> SigmaSpec {
    match (g.sigma, g.sigma_heuristic) {
        (Some(s), _) => SigmaSpec::Value(s),
        (None, m) => SigmaSpec::Heuristic { m: m.unwrap_or(10) },
    }
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || GsslError::Config(format!("cannot parse seeds '{spec}'"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.parse().map_err(|_| bad())?;
            let b: u64 = b.parse().map_err(|_| bad())?;
            out.extend(a..b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || GsslError::Config(format!("grid must be start:step:end, got '{spec}'"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, step, end] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(end >= start) {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn config(data: &DataArgs, g: &GraphArgs, e: &ExperimentArgs, method: Method) -> Result<ExperimentConfig> {
    let labels = match (e.labels, e.per_class) {
        (Some(t), _) => LabelBudget::Total(t),
        (None, p) => LabelBudget::PerClass(p.unwrap_or(10)),
    };
    let cfg = ExperimentConfig {
        dataset: data.dataset.display().to_string(),
        k: g.k,
        sigma: sigma_spec(g),
        alpha: e.alpha,
        method,
        loss: e.loss,
        noise_rate: e.noise,
        labels,
        seeds: parse_seeds(&e.seeds)?,
        iters: e.iters,
        lr: e.lr,
        p: e.p,
        epsilon: e.epsilon,
        t_max: e.t_max,
        distrust_threshold: e.distrust_threshold,
        grid: parse_grid(&e.grid)?,
        remove_diag: !e.keep_diagonal,
        record_traces: e.traces,
        record_timing: e.timing,
        cache_dir: e.cache_dir.clone(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| GsslError::io(p, e)),
        None => {
            let mut s = io::stdout().lock();
            s.write_all(text.as_bytes())
                .and_then(|_| s.write_all(b"\n"))
                .map_err(|e| GsslError::io("<stdout>", e))
        }
    }
}

fn write_curve_file(path: &Path, c: &gssl_core::autod::AlphaCurve) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| GsslError::io(path, e))?;
    curve::write_curve(c, f).map_err(|e| GsslError::data(path, e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Graph(cmd) => {
            let loaded = load(&cmd.data)?;
            let prepared = prepare_graph(&loaded.dataset.x, cmd.graph.k, sigma_spec(&cmd.graph))?;
            emit(cmd.out.as_deref(), &serde_json::to_string_pretty(&prepared.stats)?)
        }
        Command::Lgc(cmd) => run_method(cmd, Method::Lgc),
        Command::Autol(cmd) => run_method(cmd, Method::Autol),
        Command::Autod(cmd) => run_method(cmd, Method::Autod),
        Command::Sweep(cmd) => {
            let loaded = load(&cmd.data)?;
            let cfg = config(&cmd.data, &cmd.graph, &cmd.exp, Method::Autod)?;
            let prepared = prepare_graph(&loaded.dataset.x, cfg.k, cfg.sigma)?;
            let basis = spectral_basis(&prepared, cfg.p, cfg.cache_dir.as_deref())?;
            let sw = sweep_seed(&loaded.dataset, &prepared, &basis, &cfg, cfg.seeds[0], cmd.unlabeled)?;
            match cmd.out {
                Some(prefix) => {
                    let with = |suffix: &str| {
                        let mut s = prefix.clone().into_os_string();
                        s.push(suffix);
                        PathBuf::from(s)
                    };
                    write_curve_file(&with(".removed.csv"), &sw.removed)?;
                    write_curve_file(&with(".kept.csv"), &sw.kept)
                }
                None => curve::write_curve(&sw.removed, io::stdout().lock())
                    .map_err(|e| GsslError::io("<stdout>", io::Error::other(e))),
            }
        }
        Command::Eval(cmd) => {
            let loaded = load(&cmd.data)?;
            let y_true = loaded
                .dataset
                .labels
                .as_deref()
                .ok_or_else(|| GsslError::Config("eval needs a dataset with labels".into()))?;
            let f = data::load_matrix_csv(&cmd.scores)?;
            if f.rows() != y_true.len() {
                return Err(GsslError::data(
                    &cmd.scores,
                    format!("{} score rows for {} instances", f.rows(), y_true.len()),
                ));
            }
            let labeled = data::load_indices(&cmd.labeled)?;
            if let Some(&bad) = labeled.iter().find(|&&i| i >= f.rows()) {
                return Err(GsslError::data(&cmd.labeled, format!("index {bad} out of range")));
            }
            let ev = evaluate(&f, y_true, &labeled);
            emit(cmd.out.as_deref(), &serde_json::to_string_pretty(&ev)?)
        }
    }
}

fn run_method(cmd: RunCmd, method: Method) -> Result<()> {
    let loaded = load(&cmd.data)?;
    let cfg = config(&cmd.data, &cmd.graph, &cmd.exp, method)?;
    let report = run_experiment(&loaded.dataset, &cfg)?;
    emit(cmd.out.as_deref(), &report.to_json()?)?;
    if report.partial {
        let first = report.seeds.iter().find_map(|s| s.error.as_ref()).expect("partial run");
        if report.seeds.iter().all(|s| s.result.is_none()) {
            return Err(GsslError::SeedsFailed {
                class: ErrorClass::from_name(&first.class).unwrap_or(ErrorClass::Numerical),
                message: first.message.clone(),
            });
        }
        eprintln!("warning: some seeds failed; first error ({}): {}", first.class, first.message);
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
