//! A threshold sweep through the experiment runner; writes traces and
//! metrics.csv under the system temp directory.

use minibatch_kmeans::cli::data::{DataSource, GenSpec};
use minibatch_kmeans::cli::experiment::{run_experiment, ExperimentSpec};

fn main() -> minibatch_kmeans::Result<()> {
    let out = std::env::temp_dir().join("mbk-termination-sweep");
    let data = DataSource::Generated(GenSpec::uniform(20_000, 2, 9));
    let mut spec = ExperimentSpec::new(data, 4, 0.5, &out);
    spec.sweep_eps = Some(vec![0.5, 0.2, 0.1]);
    spec.trials = 4;
    spec.seed = 2024;

    let outcome = run_experiment(&spec)?;
    println!(
        "{:>5} {:>6} {:>6} {:>5} {:>16}",
        "eps", "b", "iters", "bound", "reason"
    );
    for row in &outcome.rows {
        let bound = (10.0 * row.d as f64 / row.eps).ceil();
        println!(
            "{:>5} {:>6} {:>6} {:>5} {:>16}",
            row.eps,
            row.b,
            row.iterations,
            bound,
            row.reason.to_string()
        );
    }
    println!("metrics: {}", outcome.metrics_path.display());
    Ok(())
}
