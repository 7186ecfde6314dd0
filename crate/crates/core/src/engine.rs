//! The mini-batch loop.
//!
//! Each iteration samples a batch, partitions it by the current centers,
//! moves every center toward the mean of its part by a per-cluster learning
//! rate, and then checks an early-stopping rule. The returned centers are
//! the post-update ones, including on the iteration that triggered the stop.

use serde::{Deserialize, Serialize};

use crate::analysis::hypothetical_full_update;
use crate::error::{Error, Result};
use crate::geometry::{
    center_movement, center_of_mass, cost_unchecked, nearest, sq_dist, Centers, Dataset, Points,
};
use crate::sampling::{initialize, sample_batch, Batch, InitScheme, RandomStream};

/// How the per-cluster learning rate `α` is chosen from the batch counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearningRatePolicy {
    /// `α_j = √(b_j / b)`.
    PaperSqrt,
    /// `α_j = b_j / (cumulative count of cluster j, this batch included)`.
    SklearnCumulative,
    /// `α_j = value` whenever cluster `j` received points.
    Constant { value: f64 },
}

impl std::fmt::Display for LearningRatePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LearningRatePolicy::PaperSqrt => write!(f, "paper"),
            LearningRatePolicy::SklearnCumulative => write!(f, "sklearn"),
            LearningRatePolicy::Constant { value } => write!(f, "const:{value}"),
        }
    }
}

impl std::str::FromStr for LearningRatePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(LearningRatePolicy::PaperSqrt),
            "sklearn" => Ok(LearningRatePolicy::SklearnCumulative),
            other => match other.strip_prefix("const:") {
                Some(v) => {
                    let value: f64 = v
                        .parse()
                        .map_err(|_| Error::contract(format!("bad constant rate `{v}`")))?;
                    Ok(LearningRatePolicy::Constant { value })
                }
                None => Err(Error::contract(format!("unknown learning rate `{other}`"))),
            },
        }
    }
}

/// Learning-rate policy plus the running per-cluster counts it needs.
#[derive(Debug, Clone)]
pub struct LearningRate {
    policy: LearningRatePolicy,
    cumulative: Vec<u64>,
}

impl LearningRate {
    pub fn new(policy: LearningRatePolicy, k: usize) -> Self {
        Self {
            policy,
            cumulative: vec![0; k],
        }
    }

    pub fn policy(&self) -> LearningRatePolicy {
        self.policy
    }

    /// Per-cluster rates for this iteration's counts. Advances the cumulative
    /// counts, so call exactly once per iteration.
    pub fn rates(&mut self, counts: &[usize], b: usize) -> Result<Vec<f64>> {
        if counts.len() != self.cumulative.len() {
            return Err(Error::contract(format!(
                "expected {} cluster counts, got {}",
                self.cumulative.len(),
                counts.len()
            )));
        }
        let total: usize = counts.iter().sum();
        if b == 0 || total != b {
            return Err(Error::contract(format!(
                "cluster counts sum to {total} but the batch has {b} points"
            )));
        }
        let alphas = counts
            .iter()
            .zip(self.cumulative.iter_mut())
            .map(|(&count, cum)| {
                *cum += count as u64;
                let alpha = match self.policy {
                    LearningRatePolicy::PaperSqrt => (count as f64 / b as f64).sqrt(),
                    LearningRatePolicy::SklearnCumulative if *cum == 0 => 0.0,
                    LearningRatePolicy::SklearnCumulative => count as f64 / *cum as f64,
                    LearningRatePolicy::Constant { value } if count > 0 => value,
                    LearningRatePolicy::Constant { .. } => 0.0,
                };
                debug_assert!((0.0..=1.0).contains(&alpha));
                alpha.clamp(0.0, 1.0)
            })
            .collect();
        Ok(alphas)
    }
}

/// Early-stopping rule. Both threshold comparisons are strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop when `f_B(C_i) − f_B(C_{i+1}) < eps`.
    BatchImprovement { eps: f64 },
    /// Stop when `Σ_j ‖C_{i+1}^j − C_i^j‖² < eps`.
    CenterMovement { eps: f64 },
    /// Stop when a full-data assignment pass changes no label. Only used by
    /// [`lloyd_full_batch`].
    AssignmentStable,
}

impl StoppingRule {
    pub fn eps(&self) -> Option<f64> {
        match *self {
            StoppingRule::BatchImprovement { eps } | StoppingRule::CenterMovement { eps } => {
                Some(eps)
            }
            StoppingRule::AssignmentStable => None,
        }
    }
}

pub fn should_stop(rule: &StoppingRule, local_improvement: f64, movement: f64) -> bool {
    match *rule {
        StoppingRule::BatchImprovement { eps } => local_improvement < eps,
        StoppingRule::CenterMovement { eps } => movement < eps,
        StoppingRule::AssignmentStable => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub k: usize,
    pub b: usize,
    pub policy: LearningRatePolicy,
    pub rule: StoppingRule,
    pub init: InitScheme,
    pub seed: u64,
    /// Stream id under `seed`; see [`RandomStream::with_stream`].
    #[serde(default)]
    pub stream: u64,
    /// Iteration safety cap; `None` resolves to `10·⌈d/ε⌉`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter_cap: Option<u64>,
    #[serde(default)]
    pub audit_global_cost: bool,
    /// Record `‖C_{i+1}^j − C̄_{i+1}^j‖` against the full-data update.
    #[serde(default)]
    pub audit_center_proximity: bool,
    /// Use the whole dataset, in order, as every batch (`b = n`).
    #[serde(default)]
    pub full_batch: bool,
}

impl RunConfig {
    /// Square-root learning rate, batch-improvement stopping, k-means++ init.
    pub fn new(k: usize, b: usize, eps: f64) -> Self {
        Self {
            k,
            b,
            policy: LearningRatePolicy::PaperSqrt,
            rule: StoppingRule::BatchImprovement { eps },
            init: InitScheme::KMeansPlusPlus,
            seed: 0,
            stream: 0,
            max_iter_cap: None,
            audit_global_cost: false,
            audit_center_proximity: false,
            full_batch: false,
        }
    }

    pub fn with_policy(mut self, policy: LearningRatePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_rule(mut self, rule: StoppingRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_init(mut self, init: InitScheme) -> Self {
        self.init = init;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.max_iter_cap = Some(cap);
        self
    }

    pub fn with_audits(mut self, global_cost: bool, center_proximity: bool) -> Self {
        self.audit_global_cost = global_cost;
        self.audit_center_proximity = center_proximity;
        self
    }

    pub fn full_batch(mut self) -> Self {
        self.full_batch = true;
        self
    }

    /// Checks the config against `dataset` and fills in derived fields
    /// (`b = n` in full-batch mode, default cap).
    pub fn resolve(&self, dataset: &Dataset) -> Result<RunConfig> {
        let n = dataset.len();
        if self.k == 0 || self.k > n {
            return Err(Error::contract(format!(
                "k must satisfy 1 <= k <= n (k = {}, n = {n})",
                self.k
            )));
        }
        let eps = match self.rule.eps() {
            Some(eps) if eps > 0.0 && eps.is_finite() => eps,
            Some(eps) => {
                return Err(Error::contract(format!(
                    "stopping threshold must be positive and finite, got {eps}"
                )))
            }
            None => {
                return Err(Error::contract(
                    "assignment-stable stopping is reserved for the full-batch Lloyd reference",
                ))
            }
        };
        if let LearningRatePolicy::Constant { value } = self.policy {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::contract(format!(
                    "constant learning rate must lie in [0,1], got {value}"
                )));
            }
        }
        let mut resolved = self.clone();
        if resolved.full_batch {
            resolved.b = n;
        }
        if resolved.b == 0 {
            return Err(Error::contract("batch size must be at least 1"));
        }
        let cap = resolved
            .max_iter_cap
            .unwrap_or_else(|| default_cap(dataset.dim(), eps));
        if cap == 0 {
            return Err(Error::contract("iteration cap must be at least 1"));
        }
        resolved.max_iter_cap = Some(cap);
        Ok(resolved)
    }
}

/// `10·⌈d/ε⌉`.
pub fn default_cap(d: usize, eps: f64) -> u64 {
    10 * (d as f64 / eps).ceil().max(1.0) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub i: u64,
    pub counts: Vec<usize>,
    pub alphas: Vec<f64>,
    /// `f_B(C_i) − f_B(C_{i+1})` on this iteration's batch.
    pub local_improvement: f64,
    /// `Σ_j ‖C_{i+1}^j − C_i^j‖²`.
    pub movement: f64,
    /// `f_X(C_i)`, when global-cost auditing is on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_cost: Option<f64>,
    /// `‖C_{i+1}^j − C̄_{i+1}^j‖` per center, when proximity auditing is on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cbar_dist: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StopRuleFired,
    CapReached,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::StopRuleFired => write!(f, "stop_rule_fired"),
            Termination::CapReached => write!(f, "cap_reached"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: RunConfig,
    /// Descriptor of the input data, when the caller supplied one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    pub init_centers: Centers,
    pub iterations: Vec<IterationRecord>,
    pub final_centers: Centers,
    /// `f_X` of the returned centers, when global-cost auditing is on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_global_cost: Option<f64>,
    pub reason: Termination,
}

impl RunTrace {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }
}

/// A batch split by nearest center.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub parts: Vec<Points>,
    pub counts: Vec<usize>,
}

/// Splits the batch by nearest center (ties to the smaller index), keeping
/// batch order inside each part.
pub fn partition_batch(points: &Points, centers: &Centers) -> Result<Partition> {
    if points.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            found: points.dim(),
        });
    }
    let k = centers.k();
    let mut parts: Vec<Points> = (0..k)
        .map(|_| Points::with_capacity(points.dim(), 0))
        .collect();
    let mut counts = vec![0; k];
    for x in points.rows() {
        let (j, _) = nearest(x, centers);
        parts[j].push_unchecked(x);
        counts[j] += 1;
    }
    Ok(Partition { parts, counts })
}

/// `C_j ← (1 − α_j)·C_j + α_j·cm(part_j)`; a zero rate leaves the center as is.
pub fn update_centers(centers: &Centers, parts: &[Points], alphas: &[f64]) -> Result<Centers> {
    let k = centers.k();
    if parts.len() != k || alphas.len() != k {
        return Err(Error::contract(format!(
            "expected {k} parts and rates, got {} and {}",
            parts.len(),
            alphas.len()
        )));
    }
    let mut next = Points::with_capacity(centers.dim(), k);
    for ((c, part), &alpha) in centers.rows().zip(parts).zip(alphas) {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::contract(format!(
                "learning rate {alpha} outside [0,1]"
            )));
        }
        if alpha == 0.0 {
            next.push_unchecked(c);
            continue;
        }
        if part.is_empty() {
            return Err(Error::contract(
                "positive learning rate for a cluster with no batch points",
            ));
        }
        let target = center_of_mass(part)?;
        next.push_unchecked(&convex_step(c, &target, alpha));
    }
    Ok(Centers::from_points_unchecked(next))
}

pub(crate) fn convex_step(from: &[f64], to: &[f64], alpha: f64) -> Vec<f64> {
    from.iter()
        .zip(to)
        // Rounding can overshoot the unit interval by an ulp.
        .map(|(&c, &m)| ((1.0 - alpha) * c + alpha * m).clamp(0.0, 1.0))
        .collect()
}

/// Everything one iteration computed, including quantities the trace does
/// not keep.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub record: IterationRecord,
    /// `Δ(C_i^j, cm(B_i^j))` per center, zero for empty parts.
    pub batch_mean_gap: Vec<f64>,
    pub batch_cost_before: f64,
    pub batch_cost_after: f64,
}

/// Mini-batch state machine: current centers plus learning-rate state.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    dataset: &'a Dataset,
    centers: Centers,
    rate: LearningRate,
    iteration: u64,
    record_global: bool,
    record_cbar: bool,
}

impl<'a> Engine<'a> {
    pub fn new(dataset: &'a Dataset, centers: Centers, policy: LearningRatePolicy) -> Result<Self> {
        if centers.dim() != dataset.dim() {
            return Err(Error::DimensionMismatch {
                expected: dataset.dim(),
                found: centers.dim(),
            });
        }
        let k = centers.k();
        Ok(Self {
            dataset,
            centers,
            rate: LearningRate::new(policy, k),
            iteration: 0,
            record_global: false,
            record_cbar: false,
        })
    }

    pub fn record_global_cost(mut self, on: bool) -> Self {
        self.record_global = on;
        self
    }

    pub fn record_center_proximity(mut self, on: bool) -> Self {
        self.record_cbar = on;
        self
    }

    pub fn centers(&self) -> &Centers {
        &self.centers
    }

    pub fn into_centers(self) -> Centers {
        self.centers
    }

    /// One update on the given batch.
    pub fn step(&mut self, batch: &Batch) -> Result<StepOutcome> {
        let points = &batch.points;
        let partition = partition_batch(points, &self.centers)?;
        let alphas = self.rate.rates(&partition.counts, points.len())?;
        let next = update_centers(&self.centers, &partition.parts, &alphas)?;

        let batch_cost_before = cost_unchecked(points, &self.centers);
        let batch_cost_after = cost_unchecked(points, &next);
        let movement = center_movement(&self.centers, &next)?;

        let batch_mean_gap = partition
            .parts
            .iter()
            .zip(self.centers.rows())
            .map(|(part, c)| match center_of_mass(part) {
                Ok(m) => sq_dist(c, &m),
                Err(_) => 0.0,
            })
            .collect();

        let global_cost = self
            .record_global
            .then(|| cost_unchecked(self.dataset, &self.centers));
        let cbar_dist = if self.record_cbar {
            let cbar = hypothetical_full_update(&self.centers, self.dataset, &alphas)?;
            Some(
                next.rows()
                    .zip(cbar.rows())
                    .map(|(a, b)| sq_dist(a, b).sqrt())
                    .collect(),
            )
        } else {
            None
        };

        self.iteration += 1;
        self.centers = next;
        Ok(StepOutcome {
            record: IterationRecord {
                i: self.iteration,
                counts: partition.counts,
                alphas,
                local_improvement: batch_cost_before - batch_cost_after,
                movement,
                global_cost,
                cbar_dist,
            },
            batch_mean_gap,
            batch_cost_before,
            batch_cost_after,
        })
    }
}

/// Runs the mini-batch loop with the random stream named by the config's
/// `(seed, stream)`, so the trace can be replayed from its own config.
pub fn run(dataset: &Dataset, config: &RunConfig) -> Result<RunTrace> {
    let mut rng = RandomStream::with_stream(config.seed, config.stream);
    run_with_rng(dataset, config, &mut rng)
}

/// Initializes per `config.init` from `rng`, then runs the loop on the same stream.
pub fn run_with_rng(
    dataset: &Dataset,
    config: &RunConfig,
    rng: &mut RandomStream,
) -> Result<RunTrace> {
    let resolved = config.resolve(dataset)?;
    let init = initialize(resolved.init, dataset, resolved.k, rng)?;
    run_resolved(dataset, resolved, init, rng)
}

/// Runs the loop from explicit initial centers; `config.init` is ignored.
pub fn run_from(
    dataset: &Dataset,
    config: &RunConfig,
    init: Centers,
    rng: &mut RandomStream,
) -> Result<RunTrace> {
    let resolved = config.resolve(dataset)?;
    if init.k() != resolved.k {
        return Err(Error::contract(format!(
            "config asks for k = {} but {} initial centers were given",
            resolved.k,
            init.k()
        )));
    }
    run_resolved(dataset, resolved, init, rng)
}

fn run_resolved(
    dataset: &Dataset,
    config: RunConfig,
    init: Centers,
    rng: &mut RandomStream,
) -> Result<RunTrace> {
    let cap = config.max_iter_cap.expect("resolved config carries a cap");
    let mut engine = Engine::new(dataset, init.clone(), config.policy)?
        .record_global_cost(config.audit_global_cost)
        .record_center_proximity(config.audit_center_proximity);
    let full = config.full_batch.then(|| Batch::full(dataset));

    let mut iterations = Vec::new();
    let mut reason = Termination::CapReached;
    for _ in 0..cap {
        let sampled;
        let batch = match &full {
            Some(b) => b,
            None => {
                sampled = sample_batch(dataset, config.b, rng)?;
                &sampled
            }
        };
        let outcome = engine.step(batch)?;
        let stop = should_stop(
            &config.rule,
            outcome.record.local_improvement,
            outcome.record.movement,
        );
        iterations.push(outcome.record);
        if stop {
            reason = Termination::StopRuleFired;
            break;
        }
    }

    let final_centers = engine.into_centers();
    let final_global_cost = config
        .audit_global_cost
        .then(|| cost_unchecked(dataset, &final_centers));
    Ok(RunTrace {
        config,
        dataset: None,
        init_centers: init,
        iterations,
        final_centers,
        final_global_cost,
        reason,
    })
}

/// Classic Lloyd iterations on the full dataset.
///
/// Each recorded iteration assigns every point to its nearest center and
/// moves each nonempty cluster's center to the cluster mean (empty clusters
/// keep their center). The run stops once re-assigning against the new
/// centers changes no label, or after `max_iter` updates.
pub fn lloyd_full_batch(
    dataset: &Dataset,
    k: usize,
    init: InitScheme,
    max_iter: u64,
    rng: &mut RandomStream,
) -> Result<RunTrace> {
    let mut config = RunConfig::new(k, dataset.len(), 1.0)
        .with_policy(LearningRatePolicy::Constant { value: 1.0 })
        .with_rule(StoppingRule::AssignmentStable)
        .with_init(init)
        .with_seed(rng.seed())
        .with_stream(rng.stream())
        .with_cap(max_iter)
        .with_audits(true, false)
        .full_batch();
    if k == 0 || k > dataset.len() {
        return Err(Error::contract(format!(
            "k must satisfy 1 <= k <= n (k = {k}, n = {})",
            dataset.len()
        )));
    }
    let centers = initialize(init, dataset, k, rng)?;
    config.k = centers.k();
    lloyd_run(dataset, config, centers)
}

/// [`lloyd_full_batch`] from explicit initial centers.
pub fn lloyd_from(dataset: &Dataset, init: Centers, max_iter: u64) -> Result<RunTrace> {
    let config = RunConfig::new(init.k(), dataset.len(), 1.0)
        .with_policy(LearningRatePolicy::Constant { value: 1.0 })
        .with_rule(StoppingRule::AssignmentStable)
        .with_cap(max_iter)
        .with_audits(true, false)
        .full_batch();
    lloyd_run(dataset, config, init)
}

fn lloyd_run(dataset: &Dataset, config: RunConfig, init: Centers) -> Result<RunTrace> {
    if init.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            found: init.dim(),
        });
    }
    let max_iter = config.max_iter_cap.unwrap_or(0);
    if max_iter == 0 {
        return Err(Error::contract("iteration cap must be at least 1"));
    }
    let k = init.k();
    let d = dataset.dim();
    let label_all = |centers: &Points| -> Vec<usize> {
        dataset.rows().map(|x| nearest(x, centers).0).collect()
    };

    let mut centers = init.clone();
    let mut labels = label_all(&centers);
    let mut iterations = Vec::new();
    let mut reason = Termination::CapReached;

    for i in 1..=max_iter {
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (x, &j) in dataset.rows().zip(&labels) {
            counts[j] += 1;
            for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut next = Points::with_capacity(d, k);
        for j in 0..k {
            if counts[j] == 0 {
                next.push_unchecked(centers.center(j));
            } else {
                let mean: Vec<f64> = sums[j * d..(j + 1) * d]
                    .iter()
                    .map(|s| s / counts[j] as f64)
                    .collect();
                next.push_unchecked(&mean);
            }
        }
        let next = Centers::from_points_unchecked(next);

        let before = cost_unchecked(dataset, &centers);
        let after = cost_unchecked(dataset, &next);
        let movement = center_movement(&centers, &next)?;
        iterations.push(IterationRecord {
            i,
            alphas: counts
                .iter()
                .map(|&c| if c > 0 { 1.0 } else { 0.0 })
                .collect(),
            counts,
            local_improvement: before - after,
            movement,
            global_cost: Some(before),
            cbar_dist: None,
        });

        centers = next;
        let relabeled = label_all(&centers);
        if relabeled == labels {
            reason = Termination::StopRuleFired;
            break;
        }
        labels = relabeled;
    }

    let final_global_cost = Some(cost_unchecked(dataset, &centers));
    Ok(RunTrace {
        config,
        dataset: None,
        init_centers: init,
        iterations,
        final_centers: centers,
        final_global_cost,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cost;

    fn line(values: &[f64]) -> Dataset {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    fn pts(values: &[f64]) -> Points {
        line(values).into_points()
    }

    #[test]
    fn partition_examples() {
        let c = Centers::from_rows(&[[0.0], [1.0]]).unwrap();
        let p = partition_batch(&pts(&[0.1, 0.2, 0.3]), &c).unwrap();
        assert_eq!(p.counts, vec![3, 0]);
        assert!(p.parts[1].is_empty());

        let p = partition_batch(&pts(&[0.0, 1.0]), &c).unwrap();
        assert_eq!(p.counts, vec![1, 1]);

        let p = partition_batch(&pts(&[0.8, 0.8, 0.2]), &c).unwrap();
        assert_eq!(p.counts, vec![1, 2]);
        assert_eq!(p.parts[1].to_rows(), vec![vec![0.8], vec![0.8]]);
    }

    #[test]
    fn learning_rate_examples() {
        let mut sqrt_rate = LearningRate::new(LearningRatePolicy::PaperSqrt, 2);
        assert_eq!(sqrt_rate.rates(&[25, 75], 100).unwrap()[0], 0.5);
        assert_eq!(sqrt_rate.rates(&[0, 100], 100).unwrap(), vec![0.0, 1.0]);

        let mut sk = LearningRate::new(LearningRatePolicy::SklearnCumulative, 2);
        assert_eq!(sk.rates(&[10, 0], 10).unwrap(), vec![1.0, 0.0]);
        assert_eq!(sk.rates(&[10, 0], 10).unwrap(), vec![0.5, 0.0]);
        assert_eq!(sk.rates(&[5, 5], 10).unwrap(), vec![0.2, 1.0]);

        let mut c = LearningRate::new(LearningRatePolicy::Constant { value: 0.3 }, 2);
        assert_eq!(c.rates(&[4, 0], 4).unwrap(), vec![0.3, 0.0]);

        assert!(sqrt_rate.rates(&[1, 1], 3).is_err());
        assert!(sqrt_rate.rates(&[1, 1, 1], 3).is_err());
    }

    #[test]
    fn update_examples() {
        let c = Centers::from_rows(&[[0.0], [0.4]]).unwrap();
        let parts = vec![pts(&[1.0]), pts(&[0.2, 0.6])];
        assert_eq!(update_centers(&c, &parts, &[0.0, 0.0]).unwrap(), c);
        assert_eq!(
            update_centers(&c, &parts, &[0.5, 1.0]).unwrap().to_rows(),
            vec![vec![0.5], vec![0.4]]
        );
        let empty = vec![pts(&[1.0]), Points::empty(1).unwrap()];
        assert!(update_centers(&c, &empty, &[0.5, 0.5]).is_err());
        assert!(update_centers(&c, &empty, &[0.5, 0.0]).is_ok());
        assert!(update_centers(&c, &parts, &[1.5, 0.0]).is_err());
    }

    #[test]
    fn stopping_is_strict() {
        let eps = 0.1;
        let improve = StoppingRule::BatchImprovement { eps };
        assert!(!should_stop(&improve, eps, 1.0));
        assert!(should_stop(&improve, eps - 1e-12, 1.0));
        let mv = StoppingRule::CenterMovement { eps };
        assert!(should_stop(&mv, 5.0, 0.0));
        assert!(!should_stop(&mv, 0.0, eps));
    }

    #[test]
    fn single_step_hand_computation() {
        // k = 1, X = {0, 1}, batch = (x1, x2), C = 0, α = √(2/2) = 1:
        // new center 0.5, improvement f_B(0) − f_B(0.5) = 0.5 − 0.25.
        let ds = line(&[0.0, 1.0]);
        let init = Centers::from_rows(&[[0.0]]).unwrap();
        let mut engine = Engine::new(&ds, init.clone(), LearningRatePolicy::PaperSqrt).unwrap();
        let out = engine
            .step(&Batch::from_indices(&ds, vec![0, 1]).unwrap())
            .unwrap();
        assert_eq!(engine.centers().center(0), &[0.5]);
        assert_eq!(out.record.local_improvement, 0.25);
        assert_eq!(out.record.alphas, vec![1.0]);

        let config = RunConfig::new(1, 2, 0.3).full_batch();
        let trace = run_from(&ds, &config, init, &mut RandomStream::new(0)).unwrap();
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.reason, Termination::StopRuleFired);
        assert_eq!(trace.final_centers.center(0), &[0.5]);
    }

    #[test]
    fn threshold_above_dimension_stops_immediately() {
        let ds = line(&[0.0, 0.2, 0.9, 1.0, 0.5]);
        for seed in 0..20 {
            let config = RunConfig::new(2, 3, 2.0).with_seed(seed);
            let trace = run(&ds, &config).unwrap();
            assert_eq!(trace.iterations.len(), 1);
            assert_eq!(trace.reason, Termination::StopRuleFired);
        }
    }

    #[test]
    fn cap_reached_is_reported() {
        // Halfway steps from 0.5 toward 0 or 1 never land on a data point, so
        // the movement stays positive and only the cap ends the run.
        let ds = line(&[0.0, 1.0]);
        let config = RunConfig::new(1, 1, 1e-300)
            .with_policy(LearningRatePolicy::Constant { value: 0.5 })
            .with_rule(StoppingRule::CenterMovement { eps: 1e-300 })
            .with_cap(7);
        let init = Centers::from_rows(&[[0.5]]).unwrap();
        let trace = run_from(&ds, &config, init, &mut RandomStream::new(3)).unwrap();
        assert_eq!(trace.reason, Termination::CapReached);
        assert_eq!(trace.iterations.len(), 7);

        // A zero rate never moves anything and stops on the first check.
        let frozen = config.with_policy(LearningRatePolicy::Constant { value: 0.0 });
        let trace = run(&ds, &frozen).unwrap();
        assert_eq!(trace.reason, Termination::StopRuleFired);
        assert_eq!(trace.iterations.len(), 1);
    }

    #[test]
    fn config_validation() {
        let ds = line(&[0.0, 1.0]);
        assert!(run(&ds, &RunConfig::new(3, 2, 0.1)).is_err());
        assert!(run(&ds, &RunConfig::new(1, 0, 0.1)).is_err());
        assert!(run(&ds, &RunConfig::new(1, 2, 0.0)).is_err());
        assert!(run(&ds, &RunConfig::new(1, 2, 0.1).with_cap(0)).is_err());
        assert!(run(
            &ds,
            &RunConfig::new(1, 2, 0.1).with_policy(LearningRatePolicy::Constant { value: 2.0 })
        )
        .is_err());
        assert_eq!(
            RunConfig::new(1, 2, 0.3).resolve(&ds).unwrap().max_iter_cap,
            Some(40)
        );
    }

    #[test]
    fn lloyd_examples() {
        let ds = line(&[0.0, 0.1, 0.9, 1.0]);
        let trace = lloyd_from(&ds, Centers::from_rows(&[[0.0], [1.0]]).unwrap(), 100).unwrap();
        assert_eq!(trace.reason, Termination::StopRuleFired);
        assert_eq!(trace.final_centers.to_rows(), vec![vec![0.05], vec![0.95]]);
        assert!((trace.final_global_cost.unwrap() - 0.0025).abs() < 1e-15);

        let converged = trace.final_centers.clone();
        let again = lloyd_from(&ds, converged.clone(), 100).unwrap();
        assert_eq!(again.iterations.len(), 1);
        assert_eq!(again.final_centers, converged);

        let all = lloyd_full_batch(
            &ds,
            4,
            InitScheme::KMeansPlusPlus,
            50,
            &mut RandomStream::new(1),
        )
        .unwrap();
        assert_eq!(cost(&ds, &all.final_centers).unwrap(), 0.0);
    }

    #[test]
    fn trace_json_round_trip() {
        let ds = line(&[0.0, 0.1, 0.5, 0.9, 1.0]);
        let config = RunConfig::new(2, 3, 1e-4)
            .with_policy(LearningRatePolicy::SklearnCumulative)
            .with_rule(StoppingRule::CenterMovement { eps: 1e-4 })
            .with_audits(true, true)
            .with_seed(5);
        let trace = run(&ds, &config).unwrap();
        let json = serde_json::to_string(&trace).unwrap();
        let back: RunTrace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, trace);
    }
}
