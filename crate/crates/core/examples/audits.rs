//! Record full-data costs and hypothetical full-data updates, then audit.
//! The proximity bound is tight: a 200-point batch misses it, while a
//! full-batch run matches the full-data update exactly.

use minibatch_kmeans::analysis::{
    audit_center_proximity, audit_global_progress, audit_return_not_worse,
    audit_sklearn_implication, AuditReport,
};
use minibatch_kmeans::cli::data::{generate_synthetic, GenSpec};
use minibatch_kmeans::cli::json;
use minibatch_kmeans::engine::{run, RunConfig, StoppingRule};
use minibatch_kmeans::sampling::InitScheme;

fn main() -> minibatch_kmeans::Result<()> {
    let data = generate_synthetic(&GenSpec::mixture(10_000, 4, 5, 0.05, 3))?;
    let (k, d) = (5, 4);
    // Non-final iterations are those whose batch improvement reached eps,
    // so the progress audit uses the stopping threshold.
    let eps = 0.004;
    for full in [false, true] {
        let b = 200;
        let mut config = RunConfig::new(k, b, eps)
            .with_rule(StoppingRule::BatchImprovement { eps })
            .with_init(InitScheme::Random)
            .with_audits(true, true)
            .with_seed(12)
            .with_cap(200);
        if full {
            config = config.full_batch();
        }
        let trace = run(&data, &config)?;
        println!(
            "full batch {full}: {} iterations, {}",
            trace.iteration_count(),
            trace.reason
        );
        let report = AuditReport::new(vec![
            audit_global_progress(&trace, eps)?,
            audit_return_not_worse(&trace)?,
            audit_center_proximity(&trace, d, eps)?,
            audit_sklearn_implication(&trace, eps, k, d)?,
        ]);
        for c in &report.checks {
            println!(
                "  {:<20} {}/{} violated, pass {}",
                c.name, c.violations, c.events, c.pass
            );
        }
        if !full {
            print!("  {}", json::to_string(&report.checks[3])?);
        }
    }
    Ok(())
}
