//! Recommended batch sizes and iteration bounds across thresholds.

use minibatch_kmeans::analysis::{
    recommended_batch_size, termination_bound, termination_bound_sklearn, Regime,
    DEFAULT_TERMINATION_CONSTANT,
};

fn main() -> minibatch_kmeans::Result<()> {
    let (n, k, d) = (1_000_000u64, 10u64, 8u64);
    println!("n = {n}, k = {k}, d = {d}, c = 1");
    println!(
        "{:>6} {:>12} {:>12} {:>14} {:>8} {:>10}",
        "eps", "main", "warm-up", "sklearn", "T", "T_sk"
    );
    for eps in [4.0, 2.0, 1.0, 0.5, 0.25] {
        let row: Vec<String> = [Regime::Main, Regime::WarmUp, Regime::Sklearn]
            .into_iter()
            .map(|r| {
                recommended_batch_size(r, n, k, d, eps, 1.0).map(|rec| {
                    let flag = if rec.exceeds_n { "*" } else { "" };
                    format!("{}{flag}", rec.b)
                })
            })
            .collect::<Result<_, _>>()?;
        println!(
            "{eps:>6} {:>12} {:>12} {:>14} {:>8} {:>10}",
            row[0],
            row[1],
            row[2],
            termination_bound(d, eps, DEFAULT_TERMINATION_CONSTANT),
            termination_bound_sklearn(d, eps, k, DEFAULT_TERMINATION_CONSTANT)
        );
    }
    println!("* batch larger than the dataset");
    Ok(())
}
