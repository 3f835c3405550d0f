//! Multi-seed experiments: label sampling, noise injection, method dispatch,
//! split evaluation and aggregation.

use std::path::PathBuf;
use std::time::Instant;

use gssl_core::autod::{
    autod_select, default_grid, sweep_labeled, validate_grid, AlphaCurve, SelectionCriterion,
};
use gssl_core::autol::{apply_correction, autol_run, AutolConfig};
use gssl_core::graph::{build_affinity, connected_components, laplacians, AffinityGraph, Dataset, LaplacianPair};
use gssl_core::lgc::{lgc_iterate, DiffusionParams};
use gssl_core::loo::LossKind;
use gssl_core::spectral::{eigenbasis, restrict_to_labeled, SpectralBasis};
use gssl_core::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GsslError, Result};
use crate::{cache, parallel, rng};

pub const NOISE_MODEL: &str = "uniform flip to one of the other c-1 classes, exactly round(rho*l) flips";
pub const RNG_NAME: &str = "ChaCha8 seeded by seed_from_u64; stream 0 labels, stream 1 noise";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lgc,
    Autol,
    Autod,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lgc => "lgc",
            Method::Autol => "autol",
            Method::Autod => "autod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSpec {
    Value(f64),
    /// One third of the mean distance to the `m`-th neighbor.
    Heuristic { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelBudget {
    Total(usize),
    PerClass(usize),
}

mod loss_serde {
    use gssl_core::loo::LossKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &LossKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(k.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<LossKind, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Free-form description of the data source, echoed in reports.
    pub dataset: String,
    pub k: usize,
    pub sigma: SigmaSpec,
    /// Diffusion rate for `lgc` and `autol`; ignored by `autod`.
    pub alpha: f64,
    pub method: Method,
    #[serde(with = "loss_serde")]
    pub loss: LossKind,
    pub noise_rate: f64,
    pub labels: LabelBudget,
    pub seeds: Vec<u64>,
    pub iters: usize,
    pub lr: f64,
    pub p: usize,
    pub epsilon: f64,
    pub t_max: usize,
    pub distrust_threshold: f64,
    pub grid: Vec<f64>,
    pub remove_diag: bool,
    /// Keep per-iteration loss traces and weights in the report.
    pub record_traces: bool,
    /// Add wall-clock time to the report, which makes it nondeterministic.
    pub record_timing: bool,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: String::new(),
            k: 10,
            sigma: SigmaSpec::Heuristic { m: 10 },
            alpha: 0.9,
            method: Method::Lgc,
            loss: LossKind::Xent,
            noise_rate: 0.0,
            labels: LabelBudget::PerClass(10),
            seeds: vec![0],
            iters: 5000,
            lr: 0.7,
            p: 300,
            epsilon: 1e-9,
            t_max: 1000,
            distrust_threshold: 0.1,
            grid: default_grid(),
            remove_diag: true,
            record_traces: false,
            record_timing: false,
            cache_dir: None,
        }
    }
}

fn config_error(msg: impl Into<String>) -> GsslError {
    GsslError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(config_error("at least one seed is required"));
        }
        if self.k == 0 {
            return Err(config_error("k must be at least 1"));
        }
        match self.sigma {
            SigmaSpec::Value(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(config_error(format!("sigma must be positive, got {s}")))
            }
            SigmaSpec::Heuristic { m: 0 } => return Err(config_error("heuristic sigma needs m >= 1")),
            _ => {}
        }
        if self.method != Method::Autod && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config_error(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(config_error(format!("noise rate must lie in [0, 1), got {}", self.noise_rate)));
        }
        match self.labels {
            LabelBudget::Total(0) | LabelBudget::PerClass(0) => {
                return Err(config_error("label budget must be positive"))
            }
            _ => {}
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(config_error(format!("learning rate must be nonnegative, got {}", self.lr)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(config_error(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if self.t_max == 0 || self.p == 0 {
            return Err(config_error("t_max and p must be at least 1"));
        }
        if !(self.distrust_threshold >= 0.0) {
            return Err(config_error("distrust threshold must be nonnegative"));
        }
        if self.method == Method::Autod {
            validate_grid(&self.grid).map_err(|e| config_error(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub sigma: f64,
    pub edges: usize,
    pub components: usize,
    pub min_degree: f64,
    pub max_degree: f64,
    pub mean_degree: f64,
}

/// Graph and Laplacians shared by every seed.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub graph: AffinityGraph,
    pub laplacians: LaplacianPair,
    pub stats: GraphStats,
}

pub fn resolve_sigma(x: &Mat, sigma: SigmaSpec) -> Result<f64> {
    match sigma {
        SigmaSpec::Value(s) => Ok(s),
        SigmaSpec::Heuristic { m } => {
            let s = parallel::heuristic_sigma(x, m)?;
            if !(s > 0.0) {
                return Err(GsslError::Core(gssl_core::Error::InvalidData(
                    "heuristic sigma is zero: all m-th neighbor distances vanish".into(),
                )));
            }
            Ok(s)
        }
    }
}

pub fn prepare_graph(x: &Mat, k: usize, sigma: SigmaSpec) -> Result<PreparedGraph> {
    let sigma = resolve_sigma(x, sigma)?;
    let neighbors = parallel::knn_neighbors(x, k)?;
    let graph = build_affinity(x, &neighbors, sigma)?;
    let laplacians = laplacians(&graph)?;
    let deg = &graph.degree;
    let stats = GraphStats {
        n: x.rows(),
        d: x.cols(),
        k,
        sigma,
        edges: graph.edge_count(),
        components: connected_components(&graph.w),
        min_degree: deg.iter().copied().fold(f64::INFINITY, f64::min),
        max_degree: deg.iter().copied().fold(0.0, f64::max),
        mean_degree: deg.iter().sum::<f64>() / deg.len() as f64,
    };
    Ok(PreparedGraph {
        graph,
        laplacians,
        stats,
    })
}

/// The `min(p, n)` smoothest eigenpairs, through the cache when one is
/// configured.
pub fn spectral_basis(prepared: &PreparedGraph, p: usize, cache_dir: Option<&std::path::Path>) -> Result<SpectralBasis> {
    let p = p.min(prepared.stats.n);
    let compute = || eigenbasis(&prepared.laplacians.normalized, p).map_err(GsslError::from);
    match cache_dir {
        Some(dir) => cache::load_or_compute(dir, &prepared.graph.w, p, compute),
        None => compute(),
    }
}

/// Labeled indices drawn uniformly without replacement, ascending.
pub fn sample_labels(y_true: &[usize], budget: LabelBudget, seed: u64) -> Result<Vec<usize>> {
    let mut r = rng::stream(seed, rng::LABEL_STREAM);
    let mut picked = match budget {
        LabelBudget::Total(b) => {
            if b > y_true.len() {
                return Err(config_error(format!(
                    "label budget {b} exceeds the {} instances",
                    y_true.len()
                )));
            }
            let all: Vec<usize> = (0..y_true.len()).collect();
            rng::choose(&mut r, &all, b)
        }
        LabelBudget::PerClass(b) => {
            let c = y_true.iter().max().map_or(0, |m| m + 1);
            let mut out = Vec::with_capacity(b * c);
            for class in 0..c {
                let members: Vec<usize> = (0..y_true.len()).filter(|&i| y_true[i] == class).collect();
                if members.is_empty() {
                    continue;
                }
                if b > members.len() {
                    return Err(config_error(format!(
                        "class {class} has {} instances, fewer than the per-class budget {b}",
                        members.len()
                    )));
                }
                out.extend(rng::choose(&mut r, &members, b));
            }
            out
        }
    };
    picked.sort_unstable();
    Ok(picked)
}

/// Observed labels after flipping exactly `round(ρ·l)` of them to a
/// uniformly drawn wrong class, with the flipped positions (ascending).
pub fn inject_noise(labels: &[usize], rho: f64, n_classes: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&rho) {
        return Err(config_error(format!("noise rate must lie in [0, 1), got {rho}")));
    }
    let flips = (rho * labels.len() as f64).round() as usize;
    if flips > 0 && n_classes < 2 {
        return Err(config_error("label noise needs at least two classes"));
    }
    let mut r = rng::stream(seed, rng::NOISE_STREAM);
    let positions: Vec<usize> = (0..labels.len()).collect();
    let mut mask = rng::choose(&mut r, &positions, flips);
    let mut noisy = labels.to_vec();
    for &i in &mask {
        let draw = rng::below(&mut r, (n_classes - 1) as u64) as usize;
        noisy[i] = if draw < labels[i] { draw } else { draw + 1 };
    }
    mask.sort_unstable();
    Ok((noisy, mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub labeled_acc: f64,
    /// `None` when every instance is labeled.
    pub unlabeled_acc: Option<f64>,
}

/// Argmax accuracy against `y_true`, split into labeled and unlabeled rows.
pub fn evaluate(f: &Mat, y_true: &[usize], labeled: &[usize]) -> Evaluation {
    let mut is_labeled = vec![false; f.rows()];
    for &i in labeled {
        is_labeled[i] = true;
    }
    let (mut lh, mut ln, mut uh, mut un) = (0usize, 0usize, 0usize, 0usize);
    for (i, &truth) in y_true.iter().enumerate() {
        let hit = usize::from(f.row_argmax(i) == truth);
        if is_labeled[i] {
            lh += hit;
            ln += 1;
        } else {
            uh += hit;
            un += 1;
        }
    }
    Evaluation {
        labeled_acc: if ln == 0 { 0.0 } else { lh as f64 / ln as f64 },
        unlabeled_acc: (un > 0).then(|| uh as f64 / un as f64),
    }
}

fn label_matrix(n: usize, c: usize, labeled: &[usize], classes: &[usize]) -> Result<Mat> {
    let mut y = Mat::zeros(n, c);
    for (&i, &k) in labeled.iter().zip(classes) {
        y.row_mut(i)[k] = 1.0;
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutolSummary {
    /// Dataset indices of distrusted labels.
    pub distrusted: Vec<usize>,
    /// Share of flipped labels that were distrusted.
    pub flip_recall: Option<f64>,
    /// Corrected labels scored against the clean labels.
    pub corrected_acc: f64,
    pub changed: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_trace: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutodSummary {
    pub x: f64,
    pub alpha: f64,
    pub labeled_loo_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub labeled: Vec<usize>,
    /// Dataset indices whose observed label was flipped.
    pub flipped: Vec<usize>,
    /// Observed labels scored against the clean labels.
    pub observed_acc: f64,
    pub alpha: f64,
    pub labeled_acc: f64,
    pub unlabeled_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub autol: Option<AutolSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub autod: Option<AutodSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub class: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<SeedReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<SeedFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Stat {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub labeled_acc: Option<Stat>,
    pub unlabeled_acc: Option<Stat>,
    pub observed_acc: Option<Stat>,
    pub alpha: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flip_recall: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected_acc: Option<Stat>,
}

impl Aggregate {
    pub fn from_entries(entries: &[SeedEntry]) -> Self {
        let ok: Vec<&SeedReport> = entries.iter().filter_map(|e| e.result.as_ref()).collect();
        let collect = |f: &dyn Fn(&SeedReport) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|r| f(r)).collect() };
        Aggregate {
            labeled_acc: Stat::of(&collect(&|r| Some(r.labeled_acc))),
            unlabeled_acc: Stat::of(&collect(&|r| r.unlabeled_acc)),
            observed_acc: Stat::of(&collect(&|r| Some(r.observed_acc))),
            alpha: Stat::of(&collect(&|r| Some(r.alpha))),
            flip_recall: Stat::of(&collect(&|r| r.autol.as_ref().and_then(|a| a.flip_recall))),
            corrected_acc: Stat::of(&collect(&|r| r.autol.as_ref().map(|a| a.corrected_acc))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_classes: usize,
    pub graph: GraphStats,
    pub noise_model: String,
    pub rng: String,
    pub seeds: Vec<SeedEntry>,
    pub aggregate: Aggregate,
    /// Set when at least one seed failed.
    pub partial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn true_labels(dataset: &Dataset) -> Result<&[usize]> {
    dataset
        .labels
        .as_deref()
        .ok_or_else(|| config_error("experiments need a dataset with ground-truth labels"))
}

/// Runs one seed on a prepared graph.
pub fn run_seed(
    dataset: &Dataset,
    prepared: &PreparedGraph,
    basis: Option<&SpectralBasis>,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<SeedReport> {
    let y_true = true_labels(dataset)?;
    let n = dataset.n();
    let c = dataset.n_classes;
    let s = &prepared.laplacians.similarity;
    let labeled = sample_labels(y_true, config.labels, seed)?;
    let clean: Vec<usize> = labeled.iter().map(|&i| y_true[i]).collect();
    let (observed, mask) = inject_noise(&clean, config.noise_rate, c, seed)?;
    let flipped: Vec<usize> = mask.iter().map(|&p| labeled[p]).collect();
    let agree = |a: &[usize]| a.iter().zip(&clean).filter(|(x, y)| x == y).count() as f64 / clean.len() as f64;
    let observed_acc = agree(&observed);
    let observed_onehot = Mat::one_hot(&observed.iter().map(|&k| Some(k)).collect::<Vec<_>>(), c)?;

    let mut autol = None;
    let mut autod = None;
    let (alpha, y_final) = match config.method {
        Method::Lgc => (config.alpha, label_matrix(n, c, &labeled, &observed)?),
        Method::Autol => {
            let params = DiffusionParams::new(config.alpha, config.t_max)?;
            let sub = parallel::propagation_submatrix(s, &labeled, &params)?;
            let cfg = AutolConfig {
                kind: config.loss,
                iters: config.iters,
                lr: config.lr,
                epsilon: config.epsilon,
                distrust_threshold: config.distrust_threshold,
            };
            let result = autol_run(&sub.p_ll, &observed_onehot, &cfg)?;
            let distrusted: Vec<usize> = result.distrusted.iter().map(|&p| labeled[p]).collect();
            let caught = flipped.iter().filter(|i| distrusted.contains(i)).count();
            let y_obs = label_matrix(n, c, &labeled, &observed)?;
            let y_corr = apply_correction(&result, &y_obs, &labeled)?;
            autol = Some(AutolSummary {
                flip_recall: (!flipped.is_empty()).then(|| caught as f64 / flipped.len() as f64),
                corrected_acc: agree(&result.corrected_labels),
                changed: result
                    .corrected_labels
                    .iter()
                    .zip(&observed)
                    .filter(|(a, b)| a != b)
                    .count(),
                distrusted,
                initial_loss: result.initial_loss(),
                final_loss: result.final_loss(),
                diverged: result.diverged,
                omega: config.record_traces.then(|| result.omega.clone()),
                loss_trace: config.record_traces.then(|| result.loss_trace.clone()),
            });
            (config.alpha, y_corr)
        }
        Method::Autod => {
            let basis = basis.ok_or_else(|| config_error("autod needs a spectral basis"))?;
            let lb = restrict_to_labeled(basis, &labeled, &observed_onehot)?;
            let curve = sweep_labeled(&lb, &observed_onehot, &config.grid, config.remove_diag, config.epsilon)?;
            let sel = autod_select(&curve, SelectionCriterion::LabeledAccuracy)?;
            let pt = &curve.points[sel.index.expect("grid selection")];
            autod = Some(AutodSummary {
                x: sel.x,
                alpha: sel.alpha,
                labeled_loo_acc: pt.labeled_acc,
            });
            (sel.alpha, label_matrix(n, c, &labeled, &observed)?)
        }
    };
    let f = lgc_iterate(s, &y_final, &DiffusionParams::new(alpha, config.t_max)?)?;
    let eval = evaluate(&f, y_true, &labeled);
    Ok(SeedReport {
        labeled,
        flipped,
        observed_acc,
        alpha,
        labeled_acc: eval.labeled_acc,
        unlabeled_acc: eval.unlabeled_acc,
        autol,
        autod,
    })
}

/// Runs every seed of `config` on an already prepared graph.
pub fn run_prepared(
    dataset: &Dataset,
    prepared: &PreparedGraph,
    basis: Option<&SpectralBasis>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    true_labels(dataset)?;
    let start = Instant::now();
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let entries: Vec<SeedEntry> = seeds
        .par_iter()
        .map(|&seed| match run_seed(dataset, prepared, basis, config, seed) {
            Ok(r) => SeedEntry {
                seed,
                result: Some(r),
                error: None,
            },
            Err(e) => SeedEntry {
                seed,
                result: None,
                error: Some(SeedFailure {
                    class: e.class().as_str().into(),
                    message: e.to_string(),
                }),
            },
        })
        .collect();
    let partial = entries.iter().any(|e| e.error.is_some());
    Ok(ExperimentReport {
        config: config.clone(),
        n_classes: dataset.n_classes,
        graph: prepared.stats.clone(),
        noise_model: NOISE_MODEL.into(),
        rng: RNG_NAME.into(),
        aggregate: Aggregate::from_entries(&entries),
        seeds: entries,
        partial,
        wall_clock_seconds: config.record_timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Builds the graph (and basis, for `autod`) and runs every seed.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    true_labels(dataset)?;
    let start = Instant::now();
    let prepared = prepare_graph(&dataset.x, config.k, config.sigma)?;
    let basis = match config.method {
        Method::Autod => Some(spectral_basis(&prepared, config.p, config.cache_dir.as_deref())?),
        _ => None,
    };
    let mut report = run_prepared(dataset, &prepared, basis.as_ref(), config)?;
    if config.record_timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Rate sweeps of one seed, with and without the self-influence removed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSweep {
    pub labeled: Vec<usize>,
    pub flipped: Vec<usize>,
    pub removed: AlphaCurve,
    pub kept: AlphaCurve,
}

/// Sweeps `config.grid` for one seed. With `with_unlabeled`, every grid
/// point also gets a full diffusion scored on the unlabeled instances.
pub fn sweep_seed(
    dataset: &Dataset,
    prepared: &PreparedGraph,
    basis: &SpectralBasis,
    config: &ExperimentConfig,
    seed: u64,
    with_unlabeled: bool,
) -> Result<SeedSweep> {
    validate_grid(&config.grid).map_err(|e| config_error(e.to_string()))?;
    let y_true = true_labels(dataset)?;
    let c = dataset.n_classes;
    let labeled = sample_labels(y_true, config.labels, seed)?;
    let clean: Vec<usize> = labeled.iter().map(|&i| y_true[i]).collect();
    let (observed, mask) = inject_noise(&clean, config.noise_rate, c, seed)?;
    let y_l = Mat::one_hot(&observed.iter().map(|&k| Some(k)).collect::<Vec<_>>(), c)?;
    let lb = restrict_to_labeled(basis, &labeled, &y_l)?;
    let mut removed = parallel::sweep(&lb, &y_l, &config.grid, true, config.epsilon)?;
    let mut kept = parallel::sweep(&lb, &y_l, &config.grid, false, config.epsilon)?;
    if with_unlabeled {
        let y = label_matrix(dataset.n(), c, &labeled, &observed)?;
        let alphas: Vec<f64> = removed.points.iter().map(|p| p.alpha).collect();
        let fs = parallel::diffuse_each(&prepared.laplacians.similarity, &y, &alphas, config.t_max)?;
        for ((f, a), b) in fs.iter().zip(&mut removed.points).zip(&mut kept.points) {
            let u = evaluate(f, y_true, &labeled).unlabeled_acc;
            a.unlabeled_acc = u;
            b.unlabeled_acc = u;
        }
    }
    Ok(SeedSweep {
        flipped: mask.iter().map(|&p| labeled[p]).collect(),
        labeled,
        removed,
        kept,
    })
}
