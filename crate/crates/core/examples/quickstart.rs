//! Cluster a synthetic mixture with the recommended batch size.

use minibatch_kmeans::analysis::{recommended_batch_size, Regime};
use minibatch_kmeans::cli::data::{generate_synthetic, GenSpec};
use minibatch_kmeans::engine::{run, RunConfig};
use minibatch_kmeans::geometry::cost;

fn main() -> minibatch_kmeans::Result<()> {
    let data = generate_synthetic(&GenSpec::mixture(20_000, 3, 4, 0.04, 7))?;
    let (k, eps) = (4, 0.3);
    let rec = recommended_batch_size(Regime::Main, data.len() as u64, k as u64, 3, eps, 1.0)?;
    println!("recommended b = {} (exceeds n: {})", rec.b, rec.exceeds_n);

    let config = RunConfig::new(k, rec.b as usize, eps).with_seed(42);
    let trace = run(&data, &config)?;
    println!(
        "{} iterations, {}; f_X(init) = {:.5}, f_X(final) = {:.5}",
        trace.iteration_count(),
        trace.reason,
        cost(&data, &trace.init_centers)?,
        cost(&data, &trace.final_centers)?
    );
    for (j, c) in trace.final_centers.rows().enumerate() {
        println!("center {j}: {c:.3?}");
    }
    Ok(())
}
