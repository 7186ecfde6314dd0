//! k-means++ seeding cost against the exhaustive optimum on tiny instances.

use minibatch_kmeans::cli::data::{generate_synthetic, GenSpec};
use minibatch_kmeans::geometry::cost;
use minibatch_kmeans::oracle::{brute_force_optimal, TinyInstance};
use minibatch_kmeans::sampling::{init_kmeanspp, RandomStream};

fn main() -> minibatch_kmeans::Result<()> {
    let seeds = 200;
    for (i, spec) in [
        GenSpec::mixture(12, 2, 3, 0.03, 1),
        GenSpec::mixture(12, 3, 2, 0.1, 2),
        GenSpec::uniform(10, 2, 3),
    ]
    .into_iter()
    .enumerate()
    {
        let data = generate_synthetic(&spec)?;
        let k = 3;
        let opt = brute_force_optimal(&TinyInstance::new(data.points().clone(), k)?);
        let root = RandomStream::new(i as u64);
        let mut total = 0.0;
        for s in 0..seeds {
            total += cost(&data, &init_kmeanspp(&data, k, &mut root.substream(s))?)?;
        }
        let mean = total / seeds as f64;
        let limit = 8.0 * ((k as f64).ln() + 2.0);
        println!(
            "{spec}: optimum {:.5}, k-means++ mean {:.5}, ratio {:.2} (limit {limit:.1})",
            opt.cost,
            mean,
            mean / opt.cost
        );
    }
    Ok(())
}
