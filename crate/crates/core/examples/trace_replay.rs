//! Save a trace, load it back, re-run it from the embedded config, and
//! compare the bytes.

use minibatch_kmeans::cli::data::{DataSource, GenSpec};
use minibatch_kmeans::cli::experiment::{replay_matches, run_experiment, ExperimentSpec};
use minibatch_kmeans::cli::json;
use minibatch_kmeans::engine::RunTrace;

fn main() -> minibatch_kmeans::Result<()> {
    let out = std::env::temp_dir().join("mbk-trace-replay");
    let data = DataSource::Generated(GenSpec::mixture(5_000, 3, 4, 0.05, 4));
    let mut spec = ExperimentSpec::new(data, 4, 0.05, &out);
    spec.b = Some(300);
    spec.audit_global = true;
    let outcome = run_experiment(&spec)?;
    let path = &outcome.trace_paths[0];

    let trace: RunTrace = json::read_file(path)?;
    println!(
        "{}: {} iterations, seed {} stream {}, data {}",
        path.display(),
        trace.iteration_count(),
        trace.config.seed,
        trace.config.stream,
        trace.dataset.as_deref().unwrap_or("?")
    );
    println!("replay byte-identical: {}", replay_matches(path)?);
    Ok(())
}
