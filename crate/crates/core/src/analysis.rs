//! Batch-size recommenders, the full-data comparison update, and audits that
//! check the termination argument's intermediate claims on recorded traces.
//!
//! High-probability claims are audited against a violation budget
//! ([`WHP_BUDGET`]) pooled over many runs. The implication between the
//! movement rule and the batch-improvement rule is deterministic and gets no
//! budget at all.

use rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{convex_step, LearningRatePolicy, RunTrace};
use crate::error::{Error, Result};
use crate::geometry::{center_of_mass, cost_unchecked, nearest, Centers, Dataset, Points};
use crate::sampling::{sample_batch, RandomStream};

/// Allowed violation fraction for high-probability checks.
pub const WHP_BUDGET: f64 = 0.05;

/// Default constant in front of the iteration bound.
pub const DEFAULT_TERMINATION_CONSTANT: f64 = 10.0;

/// Slack for comparisons between differences of float costs.
const PROGRESS_SLACK: f64 = 1e-9;
const IMPLICATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Any update rule: `c·(d/ε)²·(kd + ln(n·t))`, `t = ⌈10·d/ε⌉`.
    WarmUp,
    /// Standard update with `α = √(b_j/b)`: `c·(d/ε)²·ln(nkd/ε)`.
    Main,
    /// Center-movement stopping: the main formula at `ε′ = ε^1.5/√(kd)`.
    Sklearn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSizeRecommendation {
    pub regime: Regime,
    pub b: u64,
    pub n: u64,
    pub k: u64,
    pub d: u64,
    pub eps: f64,
    pub c: f64,
    /// Threshold actually plugged into the formula (`ε′` for [`Regime::Sklearn`]).
    pub effective_eps: f64,
    /// Set when `b > n`, where sampling a batch no longer makes sense.
    pub exceeds_n: bool,
}

pub fn recommended_batch_size(
    regime: Regime,
    n: u64,
    k: u64,
    d: u64,
    eps: f64,
    c: f64,
) -> Result<BatchSizeRecommendation> {
    if n == 0 || k == 0 || d == 0 {
        return Err(Error::contract("n, k and d must be positive"));
    }
    if !(eps > 0.0 && eps.is_finite() && c > 0.0 && c.is_finite()) {
        return Err(Error::contract("eps and c must be positive and finite"));
    }
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    if eps > df {
        return Err(Error::contract(format!(
            "eps = {eps} exceeds d = {d}; every run stops after one iteration"
        )));
    }
    let effective_eps = match regime {
        Regime::Sklearn => eps.powf(1.5) / (kf * df).sqrt(),
        _ => eps,
    };
    let scale = (df / effective_eps).powi(2);
    let raw = match regime {
        Regime::Main | Regime::Sklearn => c * scale * (nf * kf * df / effective_eps).ln(),
        Regime::WarmUp => {
            let t = termination_bound(d, eps, DEFAULT_TERMINATION_CONSTANT) as f64;
            c * scale * (kf * df + (nf * t).ln())
        }
    };
    let b = (raw.ceil() as u64).max(1);
    Ok(BatchSizeRecommendation {
        regime,
        b,
        n,
        k,
        d,
        eps,
        c,
        effective_eps,
        exceeds_n: b > n,
    })
}

/// `⌈c_t·d/ε⌉`.
pub fn termination_bound(d: u64, eps: f64, c_t: f64) -> u64 {
    ((c_t * d as f64 / eps).ceil() as u64).max(1)
}

/// `⌈c_t·(d/ε)^1.5·√k⌉`, the bound under center-movement stopping.
pub fn termination_bound_sklearn(d: u64, eps: f64, k: u64, c_t: f64) -> u64 {
    ((c_t * (d as f64 / eps).powf(1.5) * (k as f64).sqrt()).ceil() as u64).max(1)
}

/// The update the batch rates would produce if the batch were the whole
/// dataset: `C̄_j = (1 − α_j)·C_j + α_j·cm(X_j)` with `X_j` the full-data
/// cluster of center `j`.
pub fn hypothetical_full_update(
    centers: &Centers,
    dataset: &Dataset,
    alphas: &[f64],
) -> Result<Centers> {
    let k = centers.k();
    if alphas.len() != k {
        return Err(Error::contract(format!(
            "expected {k} learning rates, got {}",
            alphas.len()
        )));
    }
    if centers.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            found: centers.dim(),
        });
    }
    let mut clusters: Vec<Points> = (0..k)
        .map(|_| Points::with_capacity(dataset.dim(), 0))
        .collect();
    for x in dataset.rows() {
        clusters[nearest(x, centers).0].push_unchecked(x);
    }
    let mut next = Points::with_capacity(dataset.dim(), k);
    for ((c, cluster), &alpha) in centers.rows().zip(&clusters).zip(alphas) {
        if alpha == 0.0 {
            next.push_unchecked(c);
            continue;
        }
        // Batch points of cluster j are dataset points of cluster j, so a
        // positive batch rate with an empty full-data cluster cannot happen.
        if cluster.is_empty() {
            return Err(Error::contract(
                "positive learning rate for a center with an empty full-data cluster",
            ));
        }
        next.push_unchecked(&convex_step(c, &center_of_mass(cluster)?, alpha));
    }
    Ok(Centers::from_points_unchecked(next))
}

/// Outcome of one audit check, possibly pooled over several traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub events: u64,
    pub violations: u64,
    /// Smallest slack seen (negative means violated); `None` with no events.
    pub worst_margin: Option<f64>,
    /// Largest `observed / bound` ratio, for checks that bound a distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
    /// Largest violation fraction that still passes.
    pub budget: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl AuditCheck {
    fn new(name: &str, budget: f64) -> Self {
        Self {
            name: name.to_string(),
            events: 0,
            violations: 0,
            worst_margin: None,
            worst_ratio: None,
            budget,
            pass: true,
            note: None,
        }
    }

    fn observe(&mut self, margin: f64, violated: bool) {
        self.events += 1;
        if violated {
            self.violations += 1;
        }
        self.worst_margin = Some(self.worst_margin.map_or(margin, |m| m.min(margin)));
    }

    fn observe_ratio(&mut self, ratio: f64) {
        self.worst_ratio = Some(self.worst_ratio.map_or(ratio, |r| r.max(ratio)));
    }

    fn settle(mut self) -> Self {
        self.pass = self.violation_fraction() <= self.budget;
        self
    }

    pub fn violation_fraction(&self) -> f64 {
        if self.events == 0 {
            0.0
        } else {
            self.violations as f64 / self.events as f64
        }
    }

    /// Pools another check of the same kind into this one.
    pub fn merge(&mut self, other: &AuditCheck) {
        self.events += other.events;
        self.violations += other.violations;
        self.worst_margin = match (self.worst_margin, other.worst_margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.worst_ratio = match (self.worst_ratio, other.worst_ratio) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.pass = self.violation_fraction() <= self.budget;
    }

    /// Pools a list of checks; `None` for an empty list.
    pub fn pooled<'a>(checks: impl IntoIterator<Item = &'a AuditCheck>) -> Option<AuditCheck> {
        let mut iter = checks.into_iter();
        let mut acc = iter.next()?.clone();
        for c in iter {
            acc.merge(c);
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    pub pass: bool,
}

impl AuditReport {
    pub fn new(checks: Vec<AuditCheck>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { checks, pass }
    }
}

fn global_costs(trace: &RunTrace) -> Result<Vec<f64>> {
    let mut costs = trace
        .iterations
        .iter()
        .map(|r| r.global_cost)
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::MissingAuditData("trace was recorded without global costs".into()))?;
    if let Some(last) = trace.final_global_cost {
        costs.push(last);
    }
    Ok(costs)
}

/// Counts non-final iterations whose full-data improvement
/// `f_X(C_i) − f_X(C_{i+1})` falls below `ε/5`.
pub fn audit_global_progress(trace: &RunTrace, eps: f64) -> Result<AuditCheck> {
    let costs = global_costs(trace)?;
    let mut check = AuditCheck::new("global_progress", WHP_BUDGET);
    check.note = Some(format!(
        "high-probability claim audited with a {}% violation budget",
        WHP_BUDGET * 100.0
    ));
    let target = eps / 5.0;
    let non_final = trace.iterations.len().saturating_sub(1);
    for pair in costs.windows(2).take(non_final) {
        let margin = (pair[0] - pair[1]) - target;
        check.observe(margin, margin < -PROGRESS_SLACK);
    }
    Ok(check.settle())
}

/// One event per trace: whether `f_X` at return is at most `f_X` at init.
pub fn audit_return_not_worse(trace: &RunTrace) -> Result<AuditCheck> {
    let costs = global_costs(trace)?;
    let final_cost = trace.final_global_cost.ok_or_else(|| {
        Error::MissingAuditData("trace was recorded without a final global cost".into())
    })?;
    let mut check = AuditCheck::new("return_not_worse", WHP_BUDGET);
    let margin = costs[0] - final_cost;
    check.observe(margin, margin < -PROGRESS_SLACK);
    Ok(check.settle())
}

/// Counts `(i, j)` with `‖C_{i+1}^j − C̄_{i+1}^j‖ > ε/(10√d)`.
pub fn audit_center_proximity(trace: &RunTrace, d: usize, eps: f64) -> Result<AuditCheck> {
    let bound = eps / (10.0 * (d as f64).sqrt());
    let mut check = AuditCheck::new("center_proximity", WHP_BUDGET);
    check.note = Some(format!(
        "bound eps/(10*sqrt(d)) = {bound}; high-probability claim audited with a {}% violation budget",
        WHP_BUDGET * 100.0
    ));
    for record in &trace.iterations {
        let dists = record.cbar_dist.as_ref().ok_or_else(|| {
            Error::MissingAuditData("trace was recorded without full-data update distances".into())
        })?;
        for &dist in dists {
            check.observe(bound - dist, dist > bound);
            check.observe_ratio(dist / bound);
        }
    }
    Ok(check.settle())
}

/// On every iteration whose center movement exceeds `ε`, the batch
/// improvement must exceed `ε^1.5/√(kd)`. Requires the square-root rate.
pub fn audit_sklearn_implication(
    trace: &RunTrace,
    eps: f64,
    k: usize,
    d: usize,
) -> Result<AuditCheck> {
    if trace.config.policy != LearningRatePolicy::PaperSqrt {
        return Err(Error::contract(format!(
            "implication audit needs the square-root learning rate, trace used `{}`",
            trace.config.policy
        )));
    }
    let threshold = eps.powf(1.5) / ((k * d) as f64).sqrt();
    let mut check = AuditCheck::new("sklearn_implication", 0.0);
    for record in trace.iterations.iter().filter(|r| r.movement > eps) {
        let margin = record.local_improvement - threshold;
        check.observe(margin, margin.is_nan() || margin <= -IMPLICATION_SLACK);
    }
    Ok(check.settle())
}

/// Hoeffding bound `min(1, 2·exp(−2bδ²/d²))` on `Pr[|f_B(C) − f_X(C)| ≥ δ]`.
pub fn hoeffding_bound(b: usize, delta: f64, d: usize) -> f64 {
    (2.0 * (-2.0 * b as f64 * delta * delta / (d * d) as f64).exp()).min(1.0)
}

/// Samples `trials` batches against fixed centers and compares the observed
/// frequency of `|f_B(C) − f_X(C)| ≥ δ` with the Hoeffding bound plus three
/// binomial standard deviations.
///
/// Each trial draws from its own substream of a base seed taken from `rng`,
/// so the count does not depend on scheduling.
pub fn audit_concentration(
    dataset: &Dataset,
    centers: &Centers,
    b: usize,
    trials: usize,
    delta: f64,
    rng: &mut RandomStream,
) -> Result<AuditCheck> {
    if trials == 0 {
        return Err(Error::contract(
            "concentration audit needs at least one trial",
        ));
    }
    if centers.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            found: centers.dim(),
        });
    }
    let full = cost_unchecked(dataset, centers);
    let base = RandomStream::new(rng.next_u64());
    let exceed: usize = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut stream = base.substream(t as u64);
            let batch = sample_batch(dataset, b, &mut stream)?;
            let gap = (cost_unchecked(&batch.points, centers) - full).abs();
            Ok(usize::from(gap >= delta))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();

    let bound = hoeffding_bound(b, delta, dataset.dim());
    let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
    let allowed = bound + 3.0 * sigma;
    let freq = exceed as f64 / trials as f64;
    Ok(AuditCheck {
        name: "concentration".into(),
        events: trials as u64,
        violations: exceed as u64,
        worst_margin: Some(allowed - freq),
        worst_ratio: None,
        budget: allowed,
        pass: freq <= allowed,
        note: Some(format!(
            "hoeffding bound {bound}, allowance {allowed} (bound + 3 binomial sigma)"
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, run_from, RunConfig, StoppingRule};
    use crate::geometry::squared_distance;

    fn line(values: &[f64]) -> Dataset {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn recommender_examples() {
        let r = recommended_batch_size(Regime::Main, 10_000, 5, 2, 0.5, 1.0).unwrap();
        // (d/ε)² = 16, nkd/ε = 2·10^5, and 16 · ln(2·10^5) = 195.30…
        let oracle = (16.0 * (10_000.0f64 * 5.0 * 2.0 / 0.5).ln()).ceil() as u64;
        assert_eq!(oracle, 196);
        assert_eq!(r.b, oracle);
        assert!(!r.exceeds_n);

        let doubled = recommended_batch_size(Regime::Main, 10_000, 5, 2, 0.5, 2.0).unwrap();
        let raw = 16.0 * (2.0e5f64).ln();
        assert_eq!(doubled.b, (2.0 * raw).ceil() as u64);

        let big = recommended_batch_size(Regime::Main, 100, 5, 2, 0.5, 1.0).unwrap();
        assert_eq!(
            big.b,
            (16.0 * (100.0f64 * 5.0 * 2.0 / 0.5).ln()).ceil() as u64
        );
        assert!(big.exceeds_n);

        assert!(recommended_batch_size(Regime::Main, 0, 5, 2, 0.5, 1.0).is_err());
        assert!(recommended_batch_size(Regime::Main, 10, 5, 2, -0.5, 1.0).is_err());
        assert!(recommended_batch_size(Regime::Main, 10, 5, 2, 0.5, 0.0).is_err());
    }

    #[test]
    fn recommender_other_regimes() {
        // t = ⌈10·2/0.5⌉ = 40; 16·(5·2 + ln(10^4·40)).
        let w = recommended_batch_size(Regime::WarmUp, 10_000, 5, 2, 0.5, 1.0).unwrap();
        assert_eq!(w.b, (16.0 * (10.0 + (4.0e5f64).ln())).ceil() as u64);

        let s = recommended_batch_size(Regime::Sklearn, 10_000, 5, 2, 0.5, 1.0).unwrap();
        let eps_prime = 0.5f64.powf(1.5) / 10f64.sqrt();
        assert!((s.effective_eps - eps_prime).abs() < 1e-15);
        let main_at_prime = (2.0 / eps_prime).powi(2) * (10_000.0 * 5.0 * 2.0 / eps_prime).ln();
        assert_eq!(s.b, main_at_prime.ceil() as u64);
    }

    #[test]
    fn termination_bound_examples() {
        assert_eq!(termination_bound(4, 0.5, 10.0), 80);
        assert_eq!(termination_bound(3, 3.0, 1.0), 1);
        assert_eq!(termination_bound_sklearn(4, 1.0, 4, 1.0), 16);
    }

    #[test]
    fn hypothetical_update_examples() {
        let ds = line(&[0.0, 0.2, 0.9, 1.0]);
        let c = Centers::from_rows(&[[0.1], [0.8]]).unwrap();
        assert_eq!(hypothetical_full_update(&c, &ds, &[0.0, 0.0]).unwrap(), c);

        let lloyd = hypothetical_full_update(&c, &ds, &[1.0, 1.0]).unwrap();
        assert!((lloyd.center(0)[0] - 0.1).abs() < 1e-15);
        assert!((lloyd.center(1)[0] - 0.95).abs() < 1e-15);

        let two = line(&[0.0, 1.0]);
        let c0 = Centers::from_rows(&[[0.0]]).unwrap();
        assert_eq!(
            hypothetical_full_update(&c0, &two, &[0.5])
                .unwrap()
                .center(0),
            &[0.25]
        );

        // Second center owns nothing in X.
        let far = Centers::from_rows(&[[0.0], [1.0]]).unwrap();
        let near_zero = line(&[0.0, 0.1]);
        assert!(hypothetical_full_update(&far, &near_zero, &[0.5, 0.5]).is_err());
        assert!(hypothetical_full_update(&far, &near_zero, &[0.5, 0.0]).is_ok());
    }

    #[test]
    fn weighted_average_identity() {
        let x = [0.1, 0.7, 0.3];
        let y = [0.9, 0.2, 0.4];
        for alpha in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let mid = convex_step(&x, &y, alpha);
            let lhs = squared_distance(&x, &mid).unwrap();
            let rhs = alpha * alpha * squared_distance(&x, &y).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    fn full_batch_trace(eps: f64) -> RunTrace {
        let ds = line(&[0.0, 0.05, 0.1, 0.6, 0.7, 0.95, 1.0]);
        let config = RunConfig::new(2, 7, eps)
            .full_batch()
            .with_audits(true, true);
        let init = Centers::from_rows(&[[0.0], [0.05]]).unwrap();
        run_from(&ds, &config, init, &mut RandomStream::new(0)).unwrap()
    }

    #[test]
    fn full_batch_progress_and_proximity() {
        let eps = 1e-3;
        let trace = full_batch_trace(eps);
        assert!(trace.iterations.len() > 1);
        let progress = audit_global_progress(&trace, eps).unwrap();
        assert_eq!(progress.violations, 0);
        assert_eq!(progress.events as usize, trace.iterations.len() - 1);
        let prox = audit_center_proximity(&trace, 1, eps).unwrap();
        assert_eq!(prox.violations, 0);
        assert_eq!(prox.worst_ratio, Some(0.0));
        assert!(audit_return_not_worse(&trace).unwrap().pass);
    }

    #[test]
    fn single_iteration_trace_is_vacuous() {
        let trace = full_batch_trace(10.0);
        assert_eq!(trace.iterations.len(), 1);
        let check = audit_global_progress(&trace, 10.0).unwrap();
        assert_eq!(check.events, 0);
        assert!(check.pass);
    }

    #[test]
    fn audits_reject_missing_data() {
        let ds = line(&[0.0, 0.3, 1.0]);
        let trace = run(&ds, &RunConfig::new(1, 2, 0.01)).unwrap();
        assert!(matches!(
            audit_global_progress(&trace, 0.01),
            Err(Error::MissingAuditData(_))
        ));
        assert!(matches!(
            audit_center_proximity(&trace, 1, 0.01),
            Err(Error::MissingAuditData(_))
        ));
        let sk = run(
            &ds,
            &RunConfig::new(1, 2, 0.01).with_policy(LearningRatePolicy::SklearnCumulative),
        )
        .unwrap();
        assert!(audit_sklearn_implication(&sk, 0.01, 1, 1).is_err());
    }

    #[test]
    fn implication_single_cluster_example() {
        // C: 0 → cm(B) = 0.5 with α = 1: movement 0.25 > ε = 0.2, so the
        // improvement 0.25 must exceed 0.2^1.5 ≈ 0.0894.
        let ds = line(&[0.0, 1.0]);
        let config = RunConfig::new(1, 2, 0.2)
            .with_rule(StoppingRule::CenterMovement { eps: 0.2 })
            .full_batch();
        let init = Centers::from_rows(&[[0.0]]).unwrap();
        let trace = run_from(&ds, &config, init, &mut RandomStream::new(0)).unwrap();
        let first = &trace.iterations[0];
        assert_eq!(first.movement, 0.25);
        assert_eq!(first.local_improvement, 0.25);
        let check = audit_sklearn_implication(&trace, 0.2, 1, 1).unwrap();
        assert_eq!(check.events, 1);
        assert_eq!(check.violations, 0);
        let margin = check.worst_margin.unwrap();
        assert!((margin - (0.25 - 0.2f64.powf(1.5))).abs() < 1e-15);

        // Movement 0.25 ≤ ε = 0.3: hypothesis false, nothing checked.
        let quiet = audit_sklearn_implication(&trace, 0.3, 1, 1).unwrap();
        assert_eq!(quiet.events, 0);
        assert_eq!(audit_sklearn_implication(&trace, 0.2, 1, 1).unwrap(), check);
    }

    #[test]
    fn concentration_trivial_cases() {
        let ds = line(&[0.0, 0.4, 0.5, 1.0]);
        let c = Centers::from_rows(&[[0.5]]).unwrap();
        let huge = audit_concentration(&ds, &c, 10, 200, 2.0, &mut RandomStream::new(0)).unwrap();
        assert_eq!(huge.violations, 0);

        let same = line(&[0.3, 0.3, 0.3]);
        let check =
            audit_concentration(&same, &c, 5, 200, 1e-9, &mut RandomStream::new(0)).unwrap();
        assert_eq!(check.violations, 0);
        assert!(check.pass);
    }

    #[test]
    fn merge_pools_counts() {
        let mut a = AuditCheck::new("x", 0.05);
        a.observe(0.5, false);
        let mut b = AuditCheck::new("x", 0.05);
        b.observe(-0.1, true);
        a.merge(&b);
        assert_eq!((a.events, a.violations), (2, 1));
        assert_eq!(a.worst_margin, Some(-0.1));
        assert!(!a.pass);
    }
}
