//! Center-movement stopping under the square-root and cumulative learning
//! rates, and the movement-to-improvement implication check.

use minibatch_kmeans::analysis::audit_sklearn_implication;
use minibatch_kmeans::cli::data::{generate_synthetic, GenSpec};
use minibatch_kmeans::engine::{run, LearningRatePolicy, RunConfig, StoppingRule};
use minibatch_kmeans::geometry::cost;

fn main() -> minibatch_kmeans::Result<()> {
    let data = generate_synthetic(&GenSpec::mixture(10_000, 4, 5, 0.05, 1))?;
    let (k, eps) = (5, 1e-4);
    for policy in [
        LearningRatePolicy::PaperSqrt,
        LearningRatePolicy::SklearnCumulative,
    ] {
        let config = RunConfig::new(k, 256, eps)
            .with_policy(policy)
            .with_rule(StoppingRule::CenterMovement { eps })
            .with_seed(3)
            .with_cap(500);
        let trace = run(&data, &config)?;
        let last = trace.iterations.last().expect("at least one iteration");
        println!(
            "{policy:>8}: {:>3} iterations ({}), last movement {:.2e}, f_X = {:.5}",
            trace.iteration_count(),
            trace.reason,
            last.movement,
            cost(&data, &trace.final_centers)?
        );
        if policy == LearningRatePolicy::PaperSqrt {
            let check = audit_sklearn_implication(&trace, eps, k, 4)?;
            println!(
                "          implication: {} of {} large-movement steps violated",
                check.violations, check.events
            );
        }
    }
    Ok(())
}
