//! Chain bottlenecks and the uniform-disconnectedness constant λ.
//!
//! The smallest achievable "largest step" of a chain from `x` to `y` inside a
//! finite set equals the largest edge on the path joining them in a minimum
//! spanning tree (the minimax path property), so one tree answers every
//! bottleneck query.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dist, DiscreteSet, Point};

/// Relative window inside which two ratios count as tied when choosing the
/// witness pair.
const TIE_REL: f64 = 1e-9;

/// Minimum spanning tree of the complete Euclidean graph on a net.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
}

impl SpanningTree {
    /// Dense Prim, O(n²). Ties go to the lower index.
    pub fn new(k: &DiscreteSet) -> Self {
        let n = k.len();
        let mut adj = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        if n == 0 {
            return Self { adj, edges };
        }
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        best[0] = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            for v in 0..n {
                if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                    u = v;
                }
            }
            in_tree[u] = true;
            if parent[u] != usize::MAX {
                let w = best[u];
                adj[u].push((parent[u], w));
                adj[parent[u]].push((u, w));
                edges.push((parent[u], u, w));
            }
            let pu = k.point(u);
            for v in 0..n {
                if !in_tree[v] {
                    let d = dist(pu, k.point(v));
                    if d < best[v] {
                        best[v] = d;
                        parent[v] = u;
                    }
                }
            }
        }
        Self { adj, edges }
    }

    pub fn weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// For every vertex `v`, the heaviest edge on the tree path from `source`
    /// to `v` (weight and endpoints). The source maps to weight 0.
    pub fn max_edges_from(&self, source: usize) -> Vec<(f64, (usize, usize))> {
        let n = self.adj.len();
        let mut out = vec![(f64::NAN, (usize::MAX, usize::MAX)); n];
        out[source] = (0.0, (source, source));
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &(v, w) in &self.adj[u] {
                if out[v].0.is_nan() {
                    out[v] = if w > out[u].0 { (w, (u, v)) } else { out[u] };
                    stack.push(v);
                }
            }
        }
        out
    }
}

fn locate(k: &DiscreteSet, p: &[f64]) -> Result<usize> {
    k.check_dim(p.len())?;
    let (i, d) = k.nearest(p);
    if d > k.resolution() {
        return Err(Error::NotOnSet { distance: d, resolution: k.resolution() });
    }
    Ok(i)
}

/// Smallest possible largest step over chains from `x` to `y` in `k`.
pub fn bottleneck_gap(k: &DiscreteSet, x: &[f64], y: &[f64]) -> Result<f64> {
    let (i, j) = (locate(k, x)?, locate(k, y)?);
    if i == j {
        return Err(Error::CoincidentPoints);
    }
    Ok(SpanningTree::new(k).max_edges_from(i)[j].0)
}

/// Outcome of [`estimate_lambda`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisconnectionReport {
    #[serde(rename = "lambda")]
    pub lambda_estimate: f64,
    #[serde(rename = "witness")]
    pub witness_pair: (Point, Point),
    #[serde(rename = "pairs")]
    pub pair_count: usize,
}

impl DisconnectionReport {
    /// The value handed to the constructions: the estimate times `safety`.
    pub fn downstream_lambda(&self, safety: f64) -> f64 {
        self.lambda_estimate * safety
    }
}

/// Default haircut applied to the estimated λ before it drives the constructions.
pub const LAMBDA_SAFETY: f64 = 0.9;

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// λ estimate: the minimum over distinct pairs of `bottleneck / |x − y|`.
///
/// The witness is chosen among pairs whose ratio is within a relative 1e-9 of
/// the minimum: the pair with the largest separation wins, then the
/// lexicographically smallest (each pair ordered internally).
pub fn estimate_lambda(k: &DiscreteSet) -> Result<DisconnectionReport> {
    let n = k.len();
    if n < 2 {
        return Err(Error::SingletonSet);
    }
    let tree = SpanningTree::new(k);
    let mut min_ratio = f64::INFINITY;
    for i in 0..n {
        let gaps = tree.max_edges_from(i);
        for j in (i + 1)..n {
            let r = gaps[j].0 / dist(k.point(i), k.point(j));
            if r < min_ratio {
                min_ratio = r;
            }
        }
    }
    let window = min_ratio * (1.0 + TIE_REL);
    let mut witness: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        let gaps = tree.max_edges_from(i);
        for j in (i + 1)..n {
            let sep = dist(k.point(i), k.point(j));
            if gaps[j].0 / sep > window {
                continue;
            }
            let (a, b) = if lex(k.point(i), k.point(j)) == Ordering::Greater { (j, i) } else { (i, j) };
            let better = match witness {
                None => true,
                Some((wa, wb, wsep)) => {
                    sep > wsep
                        || (sep == wsep
                            && lex(k.point(a), k.point(wa))
                                .then(lex(k.point(b), k.point(wb)))
                                == Ordering::Less)
                }
            };
            if better {
                witness = Some((a, b, sep));
            }
        }
    }
    let (a, b, _) = witness.expect("at least one pair attains the minimum");
    Ok(DisconnectionReport {
        lambda_estimate: min_ratio,
        witness_pair: (Point::from_slice(k.point(a)), Point::from_slice(k.point(b))),
        pair_count: n * (n - 1) / 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cantor_net, uniform_net};
    use crate::geom::translate_scale;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Floyd–Warshall over (max, min): the minimax chain value for every pair.
    pub(crate) fn brute_minimax(k: &DiscreteSet) -> Vec<Vec<f64>> {
        let n = k.len();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { dist(k.point(i), k.point(j)) }).collect())
            .collect();
        for via in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let c = m[i][via].max(m[via][j]);
                    if c < m[i][j] {
                        m[i][j] = c;
                    }
                }
            }
        }
        m
    }

    #[test]
    fn two_points() {
        let k = DiscreteSet::new(2, 0.01, vec![Point::from([0.0, 0.0]), Point::from([3.0, 4.0])]).unwrap();
        assert_eq!(bottleneck_gap(&k, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let rep = estimate_lambda(&k).unwrap();
        assert_eq!(rep.lambda_estimate, 1.0);
        assert_eq!(rep.pair_count, 1);
    }

    #[test]
    fn uniform_grid() {
        let k = uniform_net(11);
        let g = bottleneck_gap(&k, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((g - 0.1).abs() < 1e-15);
        // brute force over the 55 pairs: ratio 0.1/(j-i)·10 is smallest for the endpoints
        let m = brute_minimax(&k);
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..11 {
            for j in i + 1..11 {
                let r = m[i][j] / dist(k.point(i), k.point(j));
                if r < best.0 - 1e-12 {
                    best = (r, i, j);
                }
            }
        }
        let rep = estimate_lambda(&k).unwrap();
        assert!((rep.lambda_estimate - 0.1).abs() < 1e-12);
        assert!((rep.lambda_estimate - best.0).abs() < 1e-15);
        assert_eq!(rep.witness_pair, (Point::from([0.0, 0.0]), Point::from([1.0, 0.0])));
        assert_eq!(rep.pair_count, 55);
    }

    #[test]
    fn cantor_bottleneck_and_lambda() {
        let k = cantor_net(4);
        let oracle = brute_minimax(&k);
        let last = k.len() - 1;
        let g = bottleneck_gap(&k, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(g, oracle[0][last]);
        assert!((g - 1.0 / 3.0).abs() < 1e-15);
        let rep = estimate_lambda(&k).unwrap();
        assert!((rep.lambda_estimate - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(rep.witness_pair, (Point::from([0.0, 0.0]), Point::from([1.0, 0.0])));
    }

    #[test]
    fn errors() {
        let k = uniform_net(3);
        assert!(matches!(bottleneck_gap(&k, &[0.0, 0.0], &[0.0, 0.0]), Err(Error::CoincidentPoints)));
        assert!(matches!(bottleneck_gap(&k, &[0.0, 3.0], &[1.0, 0.0]), Err(Error::NotOnSet { .. })));
        let single = DiscreteSet::new(2, 0.1, vec![Point::from([0.0, 0.0])]).unwrap();
        assert!(matches!(estimate_lambda(&single), Err(Error::SingletonSet)));
    }

    #[test]
    fn mst_matches_brute_force_on_random_nets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let n = rng.gen_range(2..=40);
            let pts: Vec<Point> = (0..n).map(|_| Point::from([rng.gen(), rng.gen()])).collect();
            let k = DiscreteSet::new(2, 1e-9, pts).unwrap();
            let tree = SpanningTree::new(&k);
            let oracle = brute_minimax(&k);
            for i in 0..k.len() {
                let gaps = tree.max_edges_from(i);
                for j in 0..k.len() {
                    assert_eq!(gaps[j].0, oracle[i][j]);
                }
            }
        }
    }

    #[test]
    fn self_similar_lambda_is_depth_independent() {
        let base = estimate_lambda(&cantor_net(2)).unwrap().lambda_estimate;
        for depth in 3..=5 {
            let l = estimate_lambda(&cantor_net(depth)).unwrap().lambda_estimate;
            assert!((l - base).abs() < 1e-12, "depth {depth}: {l} vs {base}");
        }
    }

    #[test]
    fn scale_invariance() {
        let k = cantor_net(3);
        let base = estimate_lambda(&k).unwrap();
        // power-of-two dilation about the origin is exact in floating point
        let dyadic = estimate_lambda(&translate_scale(&k, &[0.0, 0.0], 0.125).unwrap()).unwrap();
        assert_eq!(dyadic.lambda_estimate, base.lambda_estimate);
        let general = estimate_lambda(&translate_scale(&k, &[0.3, -0.7], 0.37).unwrap()).unwrap();
        assert!((general.lambda_estimate - base.lambda_estimate).abs() < 1e-12);
    }

    #[test]
    fn refinement_never_increases_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sets = vec![cantor_net(3), uniform_net(6)];
        for _ in 0..10 {
            let n = rng.gen_range(3..=25);
            let pts: Vec<Point> = (0..n).map(|_| Point::from([rng.gen(), rng.gen()])).collect();
            sets.push(DiscreteSet::new(2, 1e-9, pts).unwrap());
        }
        for k in sets {
            let rep = estimate_lambda(&k).unwrap();
            let tree = SpanningTree::new(&k);
            let a = k.nearest(rep.witness_pair.0.coords()).0;
            let b = k.nearest(rep.witness_pair.1.coords()).0;
            let (_, (u, v)) = tree.max_edges_from(a)[b];
            let mid: Vec<f64> = k.point(u).iter().zip(k.point(v)).map(|(p, q)| 0.5 * (p + q)).collect();
            let refined = k.union(&DiscreteSet::new(2, k.resolution(), vec![Point::new(mid).unwrap()]).unwrap()).unwrap();
            let after = estimate_lambda(&refined).unwrap().lambda_estimate;
            assert!(after <= rep.lambda_estimate, "{after} > {}", rep.lambda_estimate);
        }
    }
}
