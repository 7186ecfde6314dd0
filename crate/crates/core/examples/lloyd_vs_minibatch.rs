//! Full-batch Lloyd against mini-batch runs from the same seeding.

use std::time::Instant;

use minibatch_kmeans::cli::data::{generate_synthetic, GenSpec};
use minibatch_kmeans::engine::{lloyd_from, run_from, RunConfig};
use minibatch_kmeans::geometry::cost;
use minibatch_kmeans::sampling::{init_kmeanspp, RandomStream};

fn main() -> minibatch_kmeans::Result<()> {
    let data = generate_synthetic(&GenSpec::mixture(50_000, 2, 6, 0.06, 11))?;
    let k = 6;
    let mut rng = RandomStream::new(5);
    let init = init_kmeanspp(&data, k, &mut rng)?;
    println!("k-means++ seeding: f_X = {:.6}", cost(&data, &init)?);

    let t = Instant::now();
    let lloyd = lloyd_from(&data, init.clone(), 300)?;
    println!(
        "lloyd      : {:>3} iterations, f_X = {:.6}, {:?}",
        lloyd.iteration_count(),
        lloyd.final_global_cost.expect("lloyd records f_X"),
        t.elapsed()
    );

    for b in [100, 1_000, 10_000] {
        let t = Instant::now();
        let config = RunConfig::new(k, b, 0.01).with_cap(300);
        let trace = run_from(&data, &config, init.clone(), &mut rng.substream(b as u64))?;
        println!(
            "b = {b:>6}: {:>3} iterations, f_X = {:.6}, {:?}",
            trace.iteration_count(),
            cost(&data, &trace.final_centers)?,
            t.elapsed()
        );
    }
    Ok(())
}
