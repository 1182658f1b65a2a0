//! Points, finite nets and the point-set metrics everything else is built on.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdtree::KdTree;

/// Work size (|A|·|B|) above which [`excess`] switches to the k-d tree.
const ACCEL_THRESHOLD: usize = 4096;

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A point of ℝᵈ with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point must have dimension ≥ 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }

    pub(crate) fn from_slice(s: &[f64]) -> Self {
        Self(s.to_vec())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// Panics on non-finite input; intended for literals.
impl<const N: usize> From<[f64; N]> for Point {
    fn from(c: [f64; N]) -> Self {
        Point::new(c.to_vec()).expect("finite, nonempty literal point")
    }
}

/// Finite ε-net standing in for a compact subset of ℝᵈ.
///
/// `resolution` records the Hausdorff distance between the net and the set it
/// approximates; it is carried along, not checked. Points closer than
/// `resolution / 100` to an earlier point are dropped on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSet {
    dimension: usize,
    resolution: f64,
    coords: Vec<f64>,
}

impl DiscreteSet {
    pub fn new(dimension: usize, resolution: f64, points: Vec<Point>) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dimension);
        for p in &points {
            if p.dim() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, found: p.dim() });
            }
            coords.extend_from_slice(p.coords());
        }
        Self::from_flat(dimension, resolution, coords)
    }

    /// Builds a set from a flat `[x0, y0, x1, y1, ...]` buffer.
    pub fn from_flat(dimension: usize, resolution: f64, coords: Vec<f64>) -> Result<Self> {
        if dimension < 1 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::InvalidParameter(format!("resolution must be > 0, got {resolution}")));
        }
        if !coords.len().is_multiple_of(dimension) {
            return Err(Error::InvalidParameter("coordinate buffer is not a multiple of the dimension".into()));
        }
        if coords.is_empty() {
            return Err(Error::EmptySet);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let coords = dedup(dimension, resolution / 100.0, coords);
        Ok(Self { dimension, resolution, coords })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dedup_tolerance(&self) -> f64 {
        self.resolution / 100.0
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dimension)
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.points().map(Point::from_slice).collect()
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dimension != d {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: d });
        }
        Ok(())
    }

    /// Distance from `p` to the nearest point of the set.
    pub fn distance_to(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p.len())?;
        Ok(self.nearest(p).1)
    }

    /// Index and distance of a nearest point (brute force).
    pub fn nearest(&self, p: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, q) in self.points().enumerate() {
            let d = dist_sq(p, q);
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    /// Points in the closed ball of radius `r` about the origin, if any.
    pub fn truncate(&self, r: f64) -> Option<DiscreteSet> {
        let coords: Vec<f64> = self
            .points()
            .filter(|p| norm(p) <= r)
            .flatten()
            .copied()
            .collect();
        if coords.is_empty() {
            None
        } else {
            Some(Self { dimension: self.dimension, resolution: self.resolution, coords })
        }
    }

    /// Union of two nets; the coarser resolution is kept.
    pub fn union(&self, other: &DiscreteSet) -> Result<DiscreteSet> {
        self.check_dim(other.dimension)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Self::from_flat(self.dimension, self.resolution.max(other.resolution), coords)
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.points().enumerate() {
            for q in self.points().skip(i + 1) {
                best = best.max(dist_sq(p, q));
            }
        }
        best.sqrt()
    }
}

fn dedup(dim: usize, tol: f64, coords: Vec<f64>) -> Vec<f64> {
    let tol2 = tol * tol;
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c / tol).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut kept: Vec<f64> = Vec::with_capacity(coords.len());
    let mut offsets = vec![0i64; dim];
    'outer: for p in coords.chunks_exact(dim) {
        let k = key(p);
        // visit all 3^d neighbouring cells
        offsets.iter_mut().for_each(|o| *o = -1);
        loop {
            let cell: Vec<i64> = k.iter().zip(&offsets).map(|(a, b)| a.saturating_add(*b)).collect();
            if let Some(list) = grid.get(&cell) {
                for &j in list {
                    if dist_sq(p, &kept[j * dim..(j + 1) * dim]) <= tol2 {
                        continue 'outer;
                    }
                }
            }
            let mut axis = 0;
            while axis < dim {
                offsets[axis] += 1;
                if offsets[axis] <= 1 {
                    break;
                }
                offsets[axis] = -1;
                axis += 1;
            }
            if axis == dim {
                break;
            }
        }
        let idx = kept.len() / dim;
        kept.extend_from_slice(p);
        grid.entry(k).or_default().push(idx);
    }
    kept
}

fn same_dim(a: &DiscreteSet, b: &DiscreteSet) -> Result<()> {
    if a.dimension != b.dimension {
        return Err(Error::DimensionMismatch { expected: a.dimension, found: b.dimension });
    }
    Ok(())
}

/// O(|A|·|B|) reference: max over a ∈ A of min over b ∈ B of |a − b|.
pub fn excess_reference(a: &DiscreteSet, b: &DiscreteSet) -> Result<f64> {
    same_dim(a, b)?;
    let mut worst = 0.0f64;
    for p in a.points() {
        let mut best = f64::INFINITY;
        for q in b.points() {
            let d = dist_sq(p, q);
            if d < best {
                best = d;
            }
        }
        worst = worst.max(best.sqrt());
    }
    Ok(worst)
}

/// Excess of `a` over `b`, `sup_a inf_b |a − b|`. Asymmetric.
///
/// Large inputs go through a k-d tree; the result is bit-identical to
/// [`excess_reference`].
pub fn excess(a: &DiscreteSet, b: &DiscreteSet) -> Result<f64> {
    same_dim(a, b)?;
    if a.len().saturating_mul(b.len()) <= ACCEL_THRESHOLD {
        return excess_reference(a, b);
    }
    let tree = KdTree::new(b.dimension, &b.coords);
    let worst = a
        .coords
        .par_chunks_exact(a.dimension)
        .map(|p| tree.nearest(p).1.sqrt())
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be > 0, got {r}")));
    }
    Ok(())
}

/// `excess(A ∩ B̄(0, r), B)`, or 0 when the truncation of `a` is empty.
pub fn truncated_excess(a: &DiscreteSet, b: &DiscreteSet, r: f64) -> Result<f64> {
    check_radius(r)?;
    same_dim(a, b)?;
    match a.truncate(r) {
        Some(t) => excess(&t, b),
        None => Ok(0.0),
    }
}

/// Symmetric Attouch–Wets discrepancy at radius `r`.
pub fn aw_discrepancy(a: &DiscreteSet, b: &DiscreteSet, r: f64) -> Result<f64> {
    Ok(truncated_excess(a, b, r)?.max(truncated_excess(b, a, r)?))
}

/// The rescaled set `{(a − x)/r : a ∈ A}` with resolution `ε/r`.
pub fn translate_scale(a: &DiscreteSet, x: &[f64], r: f64) -> Result<DiscreteSet> {
    check_radius(r)?;
    a.check_dim(x.len())?;
    let coords: Vec<f64> = a
        .points()
        .flat_map(|p| p.iter().zip(x).map(move |(c, o)| (c - o) / r))
        .collect();
    DiscreteSet::from_flat(a.dimension, a.resolution / r, coords)
}
