//! Experiment execution: trials × sweep axes, one trace per run, one
//! metrics CSV per experiment.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    audit_center_proximity, audit_global_progress, audit_sklearn_implication,
    recommended_batch_size, Regime,
};
use crate::cli::data::DataSource;
use crate::cli::json;
use crate::engine::{run, LearningRatePolicy, RunConfig, RunTrace, StoppingRule, Termination};
use crate::error::{Error, Result};
use crate::geometry::{cost, Dataset};
use crate::sampling::InitScheme;

pub const METRICS_FILE: &str = "metrics.csv";
pub const THREADS_ENV: &str = "MBK_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopKind {
    /// Batch-cost improvement below ε.
    Improve,
    /// Total squared center movement below ε.
    Move,
}

impl StopKind {
    pub fn rule(self, eps: f64) -> StoppingRule {
        match self {
            StopKind::Improve => StoppingRule::BatchImprovement { eps },
            StopKind::Move => StoppingRule::CenterMovement { eps },
        }
    }
}

impl FromStr for StopKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "improve" => Ok(StopKind::Improve),
            "move" => Ok(StopKind::Move),
            other => Err(Error::contract(format!("unknown stopping rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for StopKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopKind::Improve => write!(f, "improve"),
            StopKind::Move => write!(f, "move"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub data: DataSource,
    pub k: usize,
    /// `None` picks the recommended batch size for each `(k, ε)`.
    pub b: Option<usize>,
    pub eps: f64,
    pub policy: LearningRatePolicy,
    pub stop: StopKind,
    pub init: InitScheme,
    pub seed: u64,
    pub trials: usize,
    pub cap: Option<u64>,
    pub audit_global: bool,
    pub audit_proximity: bool,
    pub full_batch: bool,
    pub sweep_b: Option<Vec<usize>>,
    pub sweep_eps: Option<Vec<f64>>,
    pub sweep_k: Option<Vec<usize>>,
    pub out_dir: PathBuf,
    /// Worker count; `None` defers to `MBK_THREADS`, then rayon's default.
    pub threads: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(data: DataSource, k: usize, eps: f64, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            data,
            k,
            b: None,
            eps,
            policy: LearningRatePolicy::PaperSqrt,
            stop: StopKind::Improve,
            init: InitScheme::KMeansPlusPlus,
            seed: 0,
            trials: 1,
            cap: None,
            audit_global: false,
            audit_proximity: false,
            full_batch: false,
            sweep_b: None,
            sweep_eps: None,
            sweep_k: None,
            out_dir: out_dir.into(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::contract("trials must be at least 1"));
        }
        for (name, empty) in [
            ("b", self.sweep_b.as_ref().is_some_and(Vec::is_empty)),
            ("eps", self.sweep_eps.as_ref().is_some_and(Vec::is_empty)),
            ("k", self.sweep_k.as_ref().is_some_and(Vec::is_empty)),
        ] {
            if empty {
                return Err(Error::contract(format!("sweep axis `{name}` is empty")));
            }
        }
        Ok(())
    }

    pub fn has_sweep(&self) -> bool {
        self.sweep_b.is_some() || self.sweep_eps.is_some() || self.sweep_k.is_some()
    }

    /// Expands trials × sweep axes into concrete configs. Run `r` uses
    /// substream `r` of the base seed (stream id `r + 1`).
    pub fn plan(&self, dataset: &Dataset) -> Result<Vec<RunConfig>> {
        self.validate()?;
        let ks = self.sweep_k.clone().unwrap_or_else(|| vec![self.k]);
        let epss = self.sweep_eps.clone().unwrap_or_else(|| vec![self.eps]);
        let bs: Vec<Option<usize>> = match &self.sweep_b {
            Some(bs) => bs.iter().copied().map(Some).collect(),
            None => vec![self.b],
        };
        let mut configs = Vec::new();
        for &k in &ks {
            for &eps in &epss {
                for &b in &bs {
                    let b = match b {
                        Some(b) => b,
                        None => {
                            recommended_batch_size(
                                Regime::Main,
                                dataset.len() as u64,
                                k as u64,
                                dataset.dim() as u64,
                                eps,
                                1.0,
                            )?
                            .b as usize
                        }
                    };
                    for _ in 0..self.trials {
                        let index = configs.len() as u64;
                        let mut config = RunConfig::new(k, b, eps)
                            .with_policy(self.policy)
                            .with_rule(self.stop.rule(eps))
                            .with_init(self.init)
                            .with_seed(self.seed)
                            .with_stream(index + 1)
                            .with_audits(self.audit_global, self.audit_proximity);
                        config.max_iter_cap = self.cap;
                        config.full_batch = self.full_batch;
                        configs.push(config.resolve(dataset)?);
                    }
                }
            }
        }
        Ok(configs)
    }
}

/// One CSV row per run. `wall_clock_ms` is the only column that varies
/// between identical invocations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub run: usize,
    pub seed: u64,
    pub stream: u64,
    pub b: usize,
    pub eps: f64,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub rate: String,
    pub stop: String,
    pub iterations: usize,
    pub reason: Termination,
    pub final_cost: f64,
    pub progress_pass: Option<bool>,
    pub proximity_pass: Option<bool>,
    pub implication_pass: Option<bool>,
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<MetricsRow>,
    pub trace_paths: Vec<PathBuf>,
    pub metrics_path: PathBuf,
    pub summaries: Vec<String>,
}

pub fn trace_file_name(run: usize) -> String {
    format!("trace_{run:04}.json")
}

fn worker_count(spec: &ExperimentSpec) -> Option<usize> {
    spec.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&t: &usize| t > 0)
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let dataset = spec.data.load()?;
    let configs = spec.plan(&dataset)?;
    std::fs::create_dir_all(&spec.out_dir)?;
    let source = spec.data.to_string();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = worker_count(spec) {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::contract(format!("cannot start worker pool: {e}")))?;

    let results: Vec<(MetricsRow, PathBuf, String)> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, config)| execute(index, config, &dataset, &source, spec))
            .collect::<Result<Vec<_>>>()
    })?;

    let metrics_path = spec.out_dir.join(METRICS_FILE);
    let mut writer = csv::Writer::from_path(&metrics_path)?;
    let mut rows = Vec::with_capacity(results.len());
    let mut trace_paths = Vec::with_capacity(results.len());
    let mut summaries = Vec::with_capacity(results.len());
    for (row, path, summary) in results {
        writer.serialize(&row)?;
        rows.push(row);
        trace_paths.push(path);
        summaries.push(summary);
    }
    writer.flush()?;
    Ok(ExperimentOutcome {
        rows,
        trace_paths,
        metrics_path,
        summaries,
    })
}

fn execute(
    index: usize,
    config: &RunConfig,
    dataset: &Dataset,
    source: &str,
    spec: &ExperimentSpec,
) -> Result<(MetricsRow, PathBuf, String)> {
    let started = Instant::now();
    let mut trace = run(dataset, config)?;
    let wall_clock_ms = started.elapsed().as_secs_f64() * 1e3;
    trace.dataset = Some(source.to_string());

    let eps = config
        .rule
        .eps()
        .expect("mini-batch configs carry a threshold");
    let d = dataset.dim();
    let progress_pass = config
        .audit_global_cost
        .then(|| audit_global_progress(&trace, eps).map(|c| c.pass))
        .transpose()?;
    let proximity_pass = config
        .audit_center_proximity
        .then(|| audit_center_proximity(&trace, d, eps).map(|c| c.pass))
        .transpose()?;
    let implication_pass = (config.policy == LearningRatePolicy::PaperSqrt)
        .then(|| audit_sklearn_implication(&trace, eps, config.k, d).map(|c| c.pass))
        .transpose()?;

    let path = spec.out_dir.join(trace_file_name(index));
    json::write_file(&trace, &path)?;

    let final_cost = match trace.final_global_cost {
        Some(c) => c,
        None => cost(dataset, &trace.final_centers)?,
    };
    let row = MetricsRow {
        run: index,
        seed: config.seed,
        stream: config.stream,
        b: config.b,
        eps,
        k: config.k,
        d,
        n: dataset.len(),
        rate: config.policy.to_string(),
        stop: match config.rule {
            StoppingRule::CenterMovement { .. } => "move".into(),
            _ => "improve".into(),
        },
        iterations: trace.iterations.len(),
        reason: trace.reason,
        final_cost,
        progress_pass,
        proximity_pass,
        implication_pass,
        wall_clock_ms,
    };
    let summary = format!(
        "run {index:04} k={} b={} eps={eps}: {} iterations, {}, final f_X = {final_cost:.6}",
        config.k, config.b, row.iterations, trace.reason
    );
    Ok((row, path, summary))
}

/// Re-runs a trace from its embedded config and data descriptor.
pub fn replay(trace: &RunTrace) -> Result<RunTrace> {
    let source: DataSource = trace
        .dataset
        .as_deref()
        .ok_or_else(|| Error::contract("trace has no data descriptor to replay from"))?
        .parse()?;
    let dataset = source.load()?;
    let mut again = run(&dataset, &trace.config)?;
    again.dataset = trace.dataset.clone();
    Ok(again)
}

/// Reads a trace file, replays it, and reports whether the re-serialized
/// replay matches the file byte for byte.
pub fn replay_matches(path: &Path) -> Result<bool> {
    let original = std::fs::read_to_string(path)?;
    let trace: RunTrace = serde_json::from_str(&original)?;
    Ok(json::to_string(&replay(&trace)?)? == original)
}
