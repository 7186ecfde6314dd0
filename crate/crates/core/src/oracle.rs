//! Slow reference implementations for cross-checking.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Centers, Points};

pub const MAX_TINY_POINTS: usize = 14;
pub const MAX_TINY_DIM: usize = 4;
pub const MAX_TINY_K: usize = 3;
pub const MAX_ASSIGNMENTS: u64 = 5_000_000;

/// Normalized k-means cost by a plain double loop.
pub fn naive_cost(points: &Points, centers: &Centers) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::contract("cost of an empty point tuple is undefined"));
    }
    if points.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            found: points.dim(),
        });
    }
    let mut total = 0.0;
    for i in 0..points.len() {
        let x = points.row(i);
        let mut best = f64::INFINITY;
        for j in 0..centers.k() {
            let c = centers.center(j);
            let mut dist = 0.0;
            for l in 0..x.len() {
                dist += (x[l] - c[l]) * (x[l] - c[l]);
            }
            if dist < best {
                best = dist;
            }
        }
        total += best;
    }
    Ok(total / points.len() as f64)
}

/// A clustering instance small enough for exhaustive search.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    points: Points,
    k: usize,
}

impl TinyInstance {
    pub fn new(points: Points, k: usize) -> Result<Self> {
        let n = points.len();
        if n == 0 || k == 0 {
            return Err(Error::contract("tiny instance needs n >= 1 and k >= 1"));
        }
        if n > MAX_TINY_POINTS || points.dim() > MAX_TINY_DIM || k > MAX_TINY_K {
            return Err(Error::InstanceTooLarge(format!(
                "n = {n}, d = {}, k = {k} (limits {MAX_TINY_POINTS}, {MAX_TINY_DIM}, {MAX_TINY_K})",
                points.dim()
            )));
        }
        if assignment_count(n, k) > MAX_ASSIGNMENTS {
            return Err(Error::InstanceTooLarge(format!(
                "{k}^{n} assignments exceed {MAX_ASSIGNMENTS}"
            )));
        }
        Ok(Self { points, k })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

fn assignment_count(n: usize, k: usize) -> u64 {
    (k as u64).saturating_pow(n as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalClustering {
    pub cost: f64,
    pub labels: Vec<usize>,
}

/// Minimum normalized cost over all `k^n` labelings.
///
/// For a fixed partition the sum of squared distances to a point `c` is
/// `Δ(S, cm(S)) + |S|·Δ(c, cm(S))`, minimized at `c = cm(S)`; so scoring each
/// labeling with its cluster centroids covers every center placement.
/// Empty clusters contribute nothing. Ties go to the lexicographically
/// smallest labeling (point 0 is the least significant digit).
pub fn brute_force_optimal(instance: &TinyInstance) -> OptimalClustering {
    let points = &instance.points;
    let (n, k, d) = (points.len(), instance.k, points.dim());
    let total = assignment_count(n, k);

    let score = |code: u64, labels: &mut [usize], sums: &mut [f64], counts: &mut [usize]| {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = (c % k as u64) as usize;
            c /= k as u64;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|s| *s = 0);
        for (x, &j) in points.rows().zip(labels.iter()) {
            counts[j] += 1;
            for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut cost = 0.0;
        for (x, &j) in points.rows().zip(labels.iter()) {
            let m = counts[j] as f64;
            for (l, v) in x.iter().enumerate() {
                let diff = v - sums[j * d + l] / m;
                cost += diff * diff;
            }
        }
        cost / n as f64
    };

    const CHUNK: u64 = 1 << 14;
    let chunks = total.div_ceil(CHUNK);
    let (best_cost, best_code) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut labels = vec![0; n];
            let mut sums = vec![0.0; k * d];
            let mut counts = vec![0; k];
            let mut best = (f64::INFINITY, u64::MAX);
            let end = ((chunk + 1) * CHUNK).min(total);
            for code in chunk * CHUNK..end {
                let cost = score(code, &mut labels, &mut sums, &mut counts);
                if cost < best.0 {
                    best = (cost, code);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let mut labels = vec![0; n];
    let mut c = best_code;
    for l in labels.iter_mut() {
        *l = (c % k as u64) as usize;
        c /= k as u64;
    }
    OptimalClustering {
        cost: best_cost,
        labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cost;

    fn line(values: &[f64]) -> Points {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        Points::from_rows(&rows).unwrap()
    }

    #[test]
    fn naive_cost_examples() {
        let c = Centers::from_rows(&[[0.5]]).unwrap();
        assert_eq!(naive_cost(&line(&[0.0, 1.0]), &c).unwrap(), 0.25);
        let own = Centers::from_rows(&[[0.3, 0.6]]).unwrap();
        assert_eq!(naive_cost(own.points(), &own).unwrap(), 0.0);
        assert!(naive_cost(&Points::empty(1).unwrap(), &c).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let inst = TinyInstance::new(line(&[0.0, 0.1, 0.9, 1.0]), 2).unwrap();
        let opt = brute_force_optimal(&inst);
        assert!((opt.cost - 0.0025).abs() < 1e-15);
        assert_eq!(opt.labels[0], opt.labels[1]);
        assert_eq!(opt.labels[2], opt.labels[3]);
        assert_ne!(opt.labels[0], opt.labels[2]);

        let each = TinyInstance::new(line(&[0.2, 0.5, 0.7]), 3).unwrap();
        assert_eq!(brute_force_optimal(&each).cost, 0.0);

        let same = TinyInstance::new(line(&[0.4; 6]), 2).unwrap();
        assert_eq!(brute_force_optimal(&same).cost, 0.0);
    }

    #[test]
    fn brute_force_is_permutation_invariant_and_optimal() {
        let values = [0.05, 0.93, 0.4, 0.41, 0.77, 0.12, 0.6, 0.99];
        let a = brute_force_optimal(&TinyInstance::new(line(&values), 3).unwrap());
        let mut rev = values;
        rev.reverse();
        let b = brute_force_optimal(&TinyInstance::new(line(&rev), 3).unwrap());
        assert!((a.cost - b.cost).abs() < 1e-12);

        let pts = line(&values);
        for centers in [[0.1, 0.5, 0.9], [0.0, 0.4, 0.8], [0.2, 0.45, 0.95]] {
            let c = Centers::from_rows(&centers.map(|v| [v])).unwrap();
            assert!(a.cost <= cost(&pts, &c).unwrap() + 1e-15);
        }
    }

    #[test]
    fn refuses_large_instances() {
        let big = line(&[0.5; 15]);
        assert!(matches!(
            TinyInstance::new(big, 2),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(TinyInstance::new(line(&[0.5; 3]), 4).is_err());
        let wide = Points::new(vec![0.5; 5], 5).unwrap();
        assert!(TinyInstance::new(wide, 1).is_err());
    }
}
