//! Auditing saved traces and batch-cost concentration.

use std::path::PathBuf;
use std::str::FromStr;

use crate::analysis::{
    audit_center_proximity, audit_concentration, audit_global_progress, audit_return_not_worse,
    audit_sklearn_implication, AuditCheck, AuditReport,
};
use crate::cli::data::DataSource;
use crate::cli::json;
use crate::engine::{LearningRatePolicy, RunTrace};
use crate::error::{Error, Result};
use crate::sampling::{init_kmeanspp, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Per-iteration full-data progress, plus the return-not-worse check.
    Progress,
    Proximity,
    Implication,
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "progress" => Ok(CheckKind::Progress),
            "proximity" => Ok(CheckKind::Proximity),
            "implication" => Ok(CheckKind::Implication),
            other => Err(Error::contract(format!("unknown audit check `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRequest {
    pub data: DataSource,
    pub k: usize,
    pub b: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRequest {
    pub traces: Vec<PathBuf>,
    /// `None` runs every check the traces carry data for.
    pub checks: Option<Vec<CheckKind>>,
    /// Overrides the threshold recorded in each trace's stopping rule.
    pub eps: Option<f64>,
    pub concentration: Option<ConcentrationRequest>,
}

fn applicable(trace: &RunTrace) -> Vec<CheckKind> {
    let mut kinds = Vec::new();
    if trace.iterations.iter().all(|r| r.global_cost.is_some()) && trace.final_global_cost.is_some()
    {
        kinds.push(CheckKind::Progress);
    }
    if trace.iterations.iter().all(|r| r.cbar_dist.is_some()) {
        kinds.push(CheckKind::Proximity);
    }
    if trace.config.policy == LearningRatePolicy::PaperSqrt {
        kinds.push(CheckKind::Implication);
    }
    kinds
}

fn audit_trace(trace: &RunTrace, kinds: &[CheckKind], eps: Option<f64>) -> Result<Vec<AuditCheck>> {
    let eps = eps
        .or(trace.config.rule.eps())
        .ok_or_else(|| Error::contract("trace has no threshold; pass an explicit eps"))?;
    let d = trace.init_centers.dim();
    let mut out = Vec::new();
    for kind in kinds {
        match kind {
            CheckKind::Progress => {
                out.push(audit_global_progress(trace, eps)?);
                out.push(audit_return_not_worse(trace)?);
            }
            CheckKind::Proximity => out.push(audit_center_proximity(trace, d, eps)?),
            CheckKind::Implication => {
                out.push(audit_sklearn_implication(trace, eps, trace.config.k, d)?)
            }
        }
    }
    Ok(out)
}

/// Runs the requested checks, pooling each kind across all traces.
pub fn run_audit(request: &AuditRequest) -> Result<AuditReport> {
    if request.traces.is_empty() && request.concentration.is_none() {
        return Err(Error::contract(
            "nothing to audit: no traces and no concentration request",
        ));
    }
    let mut pooled: Vec<AuditCheck> = Vec::new();
    for path in &request.traces {
        let trace: RunTrace = json::read_file(path)?;
        let kinds = request.checks.clone().unwrap_or_else(|| applicable(&trace));
        for check in audit_trace(&trace, &kinds, request.eps)? {
            match pooled.iter_mut().find(|c| c.name == check.name) {
                Some(acc) => acc.merge(&check),
                None => pooled.push(check),
            }
        }
    }
    if let Some(conc) = &request.concentration {
        let dataset = conc.data.load()?;
        let mut rng = RandomStream::new(conc.seed);
        let centers = init_kmeanspp(&dataset, conc.k, &mut rng)?;
        pooled.push(audit_concentration(
            &dataset,
            &centers,
            conc.b,
            conc.trials,
            conc.delta,
            &mut rng,
        )?);
    }
    Ok(AuditReport::new(pooled))
}
