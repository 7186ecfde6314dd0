//! Seeded randomness, batch sampling, and center initialization.
//!
//! All randomness flows through [`RandomStream`], a ChaCha8 generator keyed
//! by a 64-bit seed and a 64-bit stream id. Seeds are expanded with the
//! generator's `seed_from_u64` (PCG32-based), so a `(seed, stream)` pair
//! produces the same sequence on every platform. Bounded integers use
//! Lemire's multiply-and-reject method on full 64-bit draws; uniform reals
//! take the top 53 bits of a draw.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sq_dist, Centers, Dataset, Points};

/// Portable, splittable random source.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RandomStream {
    /// Root stream (stream id 0) for `seed`.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, seed, stream }
    }

    /// Independent stream number `index` under the same seed.
    ///
    /// Substreams are keyed by `(seed, index + 1)` only, so they do not depend
    /// on how far the parent has advanced. Stream 0 is reserved for the root.
    pub fn substream(&self, index: u64) -> Self {
        Self::with_stream(self.seed, index.wrapping_add(1))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer in `0..n`.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index requires a nonempty range");
        let range = n as u64;
        let mut m = u128::from(self.rng.next_u64()) * u128::from(range);
        let mut low = m as u64;
        if low < range {
            let threshold = range.wrapping_neg() % range;
            while low < threshold {
                m = u128::from(self.rng.next_u64()) * u128::from(range);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A batch of `b` dataset indices drawn with repetition, plus the resolved points.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub indices: Vec<usize>,
    pub points: Points,
}

impl Batch {
    /// Gathers the rows named by `indices`, in order.
    pub fn from_indices(dataset: &Dataset, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::contract("batch size must be at least 1"));
        }
        let mut points = Points::with_capacity(dataset.dim(), indices.len());
        for &i in &indices {
            if i >= dataset.len() {
                return Err(Error::contract(format!(
                    "batch index {i} out of range for {} points",
                    dataset.len()
                )));
            }
            points.push_unchecked(dataset.row(i));
        }
        Ok(Self { indices, points })
    }

    /// The whole dataset, in dataset order.
    pub fn full(dataset: &Dataset) -> Self {
        Self {
            indices: (0..dataset.len()).collect(),
            points: dataset.points().clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Draws `b` indices independently and uniformly from the dataset.
pub fn sample_batch(dataset: &Dataset, b: usize, rng: &mut RandomStream) -> Result<Batch> {
    if b == 0 {
        return Err(Error::contract("batch size must be at least 1"));
    }
    let n = dataset.len();
    let indices = (0..b).map(|_| rng.next_index(n)).collect();
    Batch::from_indices(dataset, indices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitScheme {
    #[default]
    #[serde(rename = "kmeanspp")]
    KMeansPlusPlus,
    Random,
}

impl std::str::FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeanspp" | "kmeans++" => Ok(InitScheme::KMeansPlusPlus),
            "random" => Ok(InitScheme::Random),
            other => Err(Error::contract(format!("unknown init scheme `{other}`"))),
        }
    }
}

impl std::fmt::Display for InitScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitScheme::KMeansPlusPlus => write!(f, "kmeanspp"),
            InitScheme::Random => write!(f, "random"),
        }
    }
}

pub fn initialize(
    scheme: InitScheme,
    dataset: &Dataset,
    k: usize,
    rng: &mut RandomStream,
) -> Result<Centers> {
    match scheme {
        InitScheme::KMeansPlusPlus => init_kmeanspp(dataset, k, rng),
        InitScheme::Random => init_random(dataset, k, rng),
    }
}

fn check_k(dataset: &Dataset, k: usize) -> Result<()> {
    if k == 0 || k > dataset.len() {
        return Err(Error::contract(format!(
            "k must satisfy 1 <= k <= n (k = {k}, n = {})",
            dataset.len()
        )));
    }
    Ok(())
}

fn gather(dataset: &Dataset, indices: &[usize]) -> Centers {
    let mut points = Points::with_capacity(dataset.dim(), indices.len());
    for &i in indices {
        points.push_unchecked(dataset.row(i));
    }
    Centers::from_points_unchecked(points)
}

/// `k` distinct dataset points chosen uniformly without replacement
/// (partial Fisher–Yates over the index range).
pub fn init_random(dataset: &Dataset, k: usize, rng: &mut RandomStream) -> Result<Centers> {
    check_k(dataset, k)?;
    let n = dataset.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.next_index(n - i);
        perm.swap(i, j);
    }
    Ok(gather(dataset, &perm[..k]))
}

/// D² seeding.
///
/// The first center is uniform over the dataset; each further center is a
/// point drawn with probability proportional to its squared distance to the
/// nearest chosen center. Once every remaining point sits on a chosen center,
/// the rest are drawn uniformly among indices not yet chosen.
pub fn init_kmeanspp(dataset: &Dataset, k: usize, rng: &mut RandomStream) -> Result<Centers> {
    check_k(dataset, k)?;
    let n = dataset.len();
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];

    let first = rng.next_index(n);
    chosen.push(first);
    taken[first] = true;
    let mut d2: Vec<f64> = dataset
        .rows()
        .map(|x| sq_dist(x, dataset.row(first)))
        .collect();

    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = 0;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    last_positive = i;
                    acc += w;
                    if acc > target {
                        pick = Some(i);
                        break;
                    }
                }
            }
            // `target` can round up to `total`; fall back to the last candidate.
            pick.unwrap_or(last_positive)
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.next_index(free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        let c = dataset.row(next);
        for (w, x) in d2.iter_mut().zip(dataset.rows()) {
            let dist = sq_dist(x, c);
            if dist < *w {
                *w = dist;
            }
        }
    }
    Ok(gather(dataset, &chosen))
}
