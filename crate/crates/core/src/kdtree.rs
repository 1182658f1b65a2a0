//! Static k-d tree over a flat coordinate buffer.
//!
//! Distances are computed with [`crate::geom::dist_sq`], the same routine the
//! brute-force reference uses, so nearest-neighbour values agree bit for bit.
//! Subtrees are pruned only when the squared axis gap strictly exceeds the
//! best squared distance; since every summand is nonnegative the rounded sum
//! can never undercut a single term, so no true minimizer is ever skipped.

use crate::geom::dist_sq;

const LEAF: usize = 8;

pub(crate) struct KdTree {
    dim: usize,
    pts: Vec<f64>,
    ids: Vec<usize>,
}

impl KdTree {
    pub(crate) fn new(dim: usize, coords: &[f64]) -> Self {
        let n = coords.len() / dim;
        let mut ids: Vec<usize> = (0..n).collect();
        build(dim, coords, &mut ids, 0);
        let mut pts = Vec::with_capacity(coords.len());
        for &i in &ids {
            pts.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        Self { dim, pts, ids }
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.pts[slot * self.dim..(slot + 1) * self.dim]
    }

    /// Index (into the original buffer) and squared distance of a nearest point.
    pub(crate) fn nearest(&self, q: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(q, 0, self.ids.len(), 0, &mut best);
        (self.ids[best.0], best.1)
    }

    fn search(&self, q: &[f64], lo: usize, hi: usize, depth: usize, best: &mut (usize, f64)) {
        if hi - lo <= LEAF {
            for slot in lo..hi {
                let d = dist_sq(q, self.point(slot));
                if d < best.1 {
                    *best = (slot, d);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = depth % self.dim;
        let split = self.point(mid)[axis];
        let d = dist_sq(q, self.point(mid));
        if d < best.1 {
            *best = (mid, d);
        }
        let gap = q[axis] - split;
        let (near, far) = if gap < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, depth + 1, best);
        if gap * gap <= best.1 {
            self.search(q, far.0, far.1, depth + 1, best);
        }
    }

    /// Original indices of all points within closed distance `r` of `q`.
    pub(crate) fn within(&self, q: &[f64], r: f64, out: &mut Vec<usize>) {
        self.range(q, r * r, 0, self.ids.len(), 0, out);
    }

    fn range(&self, q: &[f64], r2: f64, lo: usize, hi: usize, depth: usize, out: &mut Vec<usize>) {
        if hi - lo <= LEAF {
            for slot in lo..hi {
                if dist_sq(q, self.point(slot)) <= r2 {
                    out.push(self.ids[slot]);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = depth % self.dim;
        let split = self.point(mid)[axis];
        if dist_sq(q, self.point(mid)) <= r2 {
            out.push(self.ids[mid]);
        }
        let gap = q[axis] - split;
        if gap <= 0.0 || gap * gap <= r2 {
            self.range(q, r2, lo, mid, depth + 1, out);
        }
        if gap >= 0.0 || gap * gap <= r2 {
            self.range(q, r2, mid + 1, hi, depth + 1, out);
        }
    }
}

fn build(dim: usize, coords: &[f64], ids: &mut [usize], depth: usize) {
    if ids.len() <= LEAF {
        return;
    }
    let axis = depth % dim;
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| {
        coords[a * dim + axis].total_cmp(&coords[b * dim + axis])
    });
    let (left, right) = ids.split_at_mut(mid);
    build(dim, coords, left, depth + 1);
    build(dim, coords, &mut right[1..], depth + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nearest_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..4 {
            let coords: Vec<f64> = (0..300 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tree = KdTree::new(dim, &coords);
            for _ in 0..200 {
                let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let (_, d) = tree.nearest(&q);
                let scan = coords
                    .chunks_exact(dim)
                    .map(|p| dist_sq(&q, p))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(d.to_bits(), scan.to_bits());
            }
        }
    }

    #[test]
    fn range_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coords: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..1.0)).collect();
        let tree = KdTree::new(2, &coords);
        let q = [0.4, 0.6];
        let mut got = Vec::new();
        tree.within(&q, 0.2, &mut got);
        got.sort_unstable();
        let want: Vec<usize> = coords
            .chunks_exact(2)
            .enumerate()
            .filter(|(_, p)| dist_sq(&q, p) <= 0.04)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(got, want);
    }
}
