//! Batch cost against full-data cost for fixed centers, compared with the
//! Hoeffding tail bound over a range of batch sizes.

use minibatch_kmeans::analysis::{audit_concentration, hoeffding_bound};
use minibatch_kmeans::cli::data::{generate_synthetic, GenSpec};
use minibatch_kmeans::sampling::{init_kmeanspp, RandomStream};

fn main() -> minibatch_kmeans::Result<()> {
    let data = generate_synthetic(&GenSpec::uniform(10_000, 4, 21))?;
    let mut rng = RandomStream::new(77);
    let centers = init_kmeanspp(&data, 5, &mut rng)?;
    let delta = 0.05;
    println!(
        "{:>6} {:>10} {:>10} {:>6}",
        "b", "observed", "bound", "pass"
    );
    for b in [100, 500, 2_000, 10_000, 50_000] {
        let check = audit_concentration(&data, &centers, b, 2_000, delta, &mut rng)?;
        println!(
            "{b:>6} {:>10.4} {:>10.4} {:>6}",
            check.violation_fraction(),
            hoeffding_bound(b, delta, 4),
            check.pass
        );
    }
    Ok(())
}
