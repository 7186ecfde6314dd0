//! Exact geometric primitives.
//!
//! Everything here works on row-major `f64` buffers and accumulates in
//! tuple order, so the same inputs always produce bit-identical results.
//! The nearest-center search is the plain O(nk) scan; ties go to the
//! smallest center index.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered tuple of `d`-dimensional points stored row-major.
///
/// Repeated points are allowed (batches are drawn with repetition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Points {
    coords: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::contract("points must have dimension >= 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::contract(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite coordinate in point {}",
                pos / dim
            )));
        }
        Ok(Self { coords, dim })
    }

    /// An empty tuple of the given dimension.
    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(Vec::new(), dim)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::contract("cannot infer dimension from zero rows"))?;
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(coords, dim)
    }

    pub(crate) fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            coords: Vec::with_capacity(dim * n),
            dim,
        }
    }

    pub(crate) fn push_unchecked(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.dim);
        self.coords.extend_from_slice(row);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// True when every coordinate lies in the unit interval.
    pub fn in_unit_cube(&self) -> bool {
        self.coords.iter().all(|c| (0.0..=1.0).contains(c))
    }
}

impl TryFrom<Vec<Vec<f64>>> for Points {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Points::from_rows(&rows)
    }
}

impl From<Points> for Vec<Vec<f64>> {
    fn from(p: Points) -> Self {
        p.to_rows()
    }
}

fn unit_cube_check(points: &Points, what: &str) -> Result<()> {
    if let Some(pos) = points
        .as_slice()
        .iter()
        .position(|c| !(0.0..=1.0).contains(c))
    {
        return Err(Error::contract(format!(
            "{what} point {} has a coordinate outside [0,1]",
            pos / points.dim()
        )));
    }
    Ok(())
}

/// The input set: `n >= 1` points inside the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Points", into = "Points")]
pub struct Dataset(Points);

impl Dataset {
    pub fn new(points: Points) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::contract("dataset must contain at least one point"));
        }
        unit_cube_check(&points, "dataset")?;
        Ok(Self(points))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Points::from_rows(rows)?)
    }

    pub fn points(&self) -> &Points {
        &self.0
    }

    pub fn into_points(self) -> Points {
        self.0
    }
}

impl Deref for Dataset {
    type Target = Points;

    fn deref(&self) -> &Points {
        &self.0
    }
}

impl TryFrom<Points> for Dataset {
    type Error = Error;

    fn try_from(p: Points) -> Result<Self> {
        Dataset::new(p)
    }
}

impl From<Dataset> for Points {
    fn from(d: Dataset) -> Self {
        d.0
    }
}

/// An ordered tuple of `k >= 1` centers inside the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Points", into = "Points")]
pub struct Centers(Points);

impl Centers {
    pub fn new(points: Points) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::contract("at least one center is required"));
        }
        unit_cube_check(&points, "center")?;
        Ok(Self(points))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Points::from_rows(rows)?)
    }

    /// Number of centers.
    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn center(&self, j: usize) -> &[f64] {
        self.0.row(j)
    }

    pub fn points(&self) -> &Points {
        &self.0
    }

    pub(crate) fn from_points_unchecked(points: Points) -> Self {
        debug_assert!(!points.is_empty() && points.in_unit_cube());
        Self(points)
    }
}

impl Deref for Centers {
    type Target = Points;

    fn deref(&self) -> &Points {
        &self.0
    }
}

impl TryFrom<Points> for Centers {
    type Error = Error;

    fn try_from(p: Points) -> Result<Self> {
        Centers::new(p)
    }
}

impl From<Centers> for Points {
    fn from(c: Centers) -> Self {
        c.0
    }
}

/// Nearest-center labels for a tuple of points, with per-cluster sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let diff = a - b;
        acc += diff * diff;
    }
    acc
}

/// Index and squared distance of the closest center; smallest index wins ties.
#[inline]
pub(crate) fn nearest(x: &[f64], centers: &Points) -> (usize, f64) {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (j, c) in centers.rows().enumerate() {
        let dist = sq_dist(x, c);
        if dist < best_dist {
            best = j;
            best_dist = dist;
        }
    }
    (best, best_dist)
}

/// Squared Euclidean distance `‖x − y‖²`.
pub fn squared_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(sq_dist(x, y))
}

/// Sum of squared distances from every point of `set` to `c`; zero for an empty set.
pub fn delta_set(set: &Points, c: &[f64]) -> Result<f64> {
    check_dim(set.dim(), c.len())?;
    Ok(set.rows().map(|x| sq_dist(x, c)).sum())
}

/// Coordinate-wise mean, accumulated left to right and divided by the count.
pub fn center_of_mass(set: &Points) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let mut sum = vec![0.0; set.dim()];
    for x in set.rows() {
        for (s, v) in sum.iter_mut().zip(x) {
            *s += v;
        }
    }
    let n = set.len() as f64;
    for s in &mut sum {
        *s /= n;
    }
    Ok(sum)
}

pub fn assign(points: &Points, centers: &Centers) -> Result<Assignment> {
    check_dim(centers.dim(), points.dim())?;
    let mut counts = vec![0; centers.k()];
    let labels = points
        .rows()
        .map(|x| {
            let (j, _) = nearest(x, centers);
            counts[j] += 1;
            j
        })
        .collect();
    Ok(Assignment { labels, counts })
}

/// Normalized k-means objective: mean over points of the squared distance
/// to the nearest center.
pub fn cost(points: &Points, centers: &Centers) -> Result<f64> {
    check_dim(centers.dim(), points.dim())?;
    if points.is_empty() {
        return Err(Error::contract("cost of an empty point tuple is undefined"));
    }
    Ok(cost_unchecked(points, centers))
}

pub(crate) fn cost_unchecked(points: &Points, centers: &Points) -> f64 {
    let mut acc = 0.0;
    for x in points.rows() {
        acc += nearest(x, centers).1;
    }
    acc / points.len() as f64
}

/// Total squared displacement `Σ_j ‖old_j − new_j‖²`.
pub fn center_movement(old: &Centers, new: &Centers) -> Result<f64> {
    check_dim(old.dim(), new.dim())?;
    if old.k() != new.k() {
        return Err(Error::contract(format!(
            "center count mismatch: {} vs {}",
            old.k(),
            new.k()
        )));
    }
    Ok(old.rows().zip(new.rows()).map(|(a, b)| sq_dist(a, b)).sum())
}
