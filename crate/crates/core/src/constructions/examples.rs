//! The two example sets: a stack of self-similar Cantor sets accumulating at
//! the origin, and the recursive comb.

use serde::{Deserialize, Serialize};

use crate::curves::PolylineCurve;
use crate::error::{Error, Result};
use crate::geom::{aw_discrepancy, DiscreteSet, Point};
use crate::tangent::curve_blowup;

const MAX_POINTS: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorPiece {
    pub k: u32,
    /// Similarity dimension `log k / log(k+1)`.
    pub dimension: f64,
    pub dimension_numerator_log: u32,
    pub dimension_denominator_log: u32,
    /// `kⁿ·(k+1)^(-n)/k²` for `n = 1..=depth`.
    pub covering_lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorStackMeta {
    pub dimension: usize,
    pub kmax: u32,
    pub depth: u32,
    pub pieces: Vec<CantorPiece>,
}

pub fn similarity_dimension(k: u32) -> f64 {
    (k as f64).ln() / ((k + 1) as f64).ln()
}

/// Interval endpoints of `C_k ⊂ [0, 1/k²]` at generation `depth`: `k` copies
/// scaled by `1/(k+1)`, evenly spread so the first starts at 0 and the last
/// ends at `1/k²`.
pub fn cantor_piece_endpoints(k: u32, depth: u32) -> Vec<f64> {
    let kf = k as f64;
    let big_l = 1.0 / (kf * kf);
    let shift = kf / ((kf + 1.0) * (kf - 1.0));
    let mut iv = vec![(0.0, big_l)];
    for _ in 0..depth {
        iv = iv
            .into_iter()
            .flat_map(|(a, len)| (0..k).map(move |i| (a + i as f64 * len * shift, len / (kf + 1.0))))
            .collect();
    }
    iv.into_iter().flat_map(|(a, len)| [a, a + len]).collect()
}

/// Net of `{0} ∪ ⋃_{2≤k≤kmax} {0}^(d−2) × {1/k} × C_k`.
pub fn example_cantor_stack(dim: usize, kmax: u32, depth: u32) -> Result<(DiscreteSet, CantorStackMeta)> {
    if dim < 2 || kmax < 2 || depth < 1 {
        return Err(Error::InvalidParameter(format!(
            "need d ≥ 2, kmax ≥ 2, depth ≥ 1 (got d={dim}, kmax={kmax}, depth={depth})"
        )));
    }
    let total: f64 = (2..=kmax).map(|k| 2.0 * (k as f64).powi(depth as i32)).sum();
    if total > MAX_POINTS as f64 {
        return Err(Error::InvalidParameter(format!("cantor stack would have {total} points")));
    }
    let mut coords = vec![0.0; dim];
    let mut resolution = 0.0f64;
    let mut pieces = Vec::new();
    for k in 2..=kmax {
        let kf = k as f64;
        for t in cantor_piece_endpoints(k, depth) {
            let mut p = vec![0.0; dim];
            p[dim - 2] = 1.0 / kf;
            p[dim - 1] = t;
            coords.extend(p);
        }
        resolution = resolution.max(0.5 / (kf * kf) / (kf + 1.0).powi(depth as i32));
        pieces.push(CantorPiece {
            k,
            dimension: similarity_dimension(k),
            dimension_numerator_log: k,
            dimension_denominator_log: k + 1,
            covering_lengths: (1..=depth)
                .map(|n| kf.powi(n as i32) * (kf + 1.0).powi(-(n as i32)) / (kf * kf))
                .collect(),
        });
    }
    let set = DiscreteSet::from_flat(dim, resolution, coords)?;
    Ok((set, CantorStackMeta { dimension: dim, kmax, depth, pieces }))
}

/// `0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, …`: reduced fractions by denominator.
pub fn rational_enumeration(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut q = 1u64;
    if count > 0 {
        out.push(0.0);
    }
    while out.len() < count {
        for p in 1..=q {
            if out.len() == count {
                break;
            }
            if gcd(p, q) == 1 {
                out.push(p as f64 / q as f64);
            }
        }
        q += 1;
    }
    out
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Base-2 van der Corput sequence from its second term: 1/2, 1/4, 3/4, 1/8, …
pub fn van_der_corput(i: usize) -> f64 {
    let mut n = i + 1;
    let (mut v, mut base) = (0.0, 0.5);
    while n > 0 {
        if n & 1 == 1 {
            v += base;
        }
        n >>= 1;
        base *= 0.5;
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombSegment {
    pub start: Point,
    pub end: Point,
    /// 0 for the baseline.
    pub stage: u32,
    /// Index within the stage.
    pub index: usize,
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comb {
    pub stages: u32,
    pub teeth: usize,
    pub segments: Vec<CombSegment>,
    /// Length added at each stage `1..=stages`.
    pub stage_lengths: Vec<f64>,
    /// Depth-first walk of the segment tree; teeth are retraced.
    pub curve: PolylineCurve,
}

impl Comb {
    /// `ℋ¹` of the comb (retraced teeth counted once).
    pub fn length(&self) -> f64 {
        self.curve.image_length()
    }
}

/// Stage `stages` of the recursive comb with `teeth` new segments per stage.
pub fn example_comb(stages: u32, teeth: usize) -> Result<Comb> {
    if stages < 1 || teeth < 1 {
        return Err(Error::InvalidParameter(format!("need stages ≥ 1 and teeth ≥ 1 (got {stages}, {teeth})")));
    }
    if stages > 12 || teeth > 10_000 {
        return Err(Error::InvalidParameter("comb parameters too large".into()));
    }
    let mut segs = vec![CombSegment {
        start: Point::from([0.0, 0.0]),
        end: Point::from([1.0, 0.0]),
        stage: 0,
        index: 0,
        parent: None,
    }];
    let mut stage_lengths = Vec::new();
    for (j, q) in rational_enumeration(teeth).into_iter().enumerate() {
        let h = 1.0 / (4.0 * ((j + 1) * (j + 1)) as f64);
        segs.push(CombSegment {
            start: Point::from([q, 0.0]),
            end: Point::from([q, h]),
            stage: 1,
            index: j,
            parent: Some(0),
        });
    }
    stage_lengths.push(segs[1..].iter().map(|s| s.start.dist(&s.end)).sum());
    for n in 1..stages {
        let comps: Vec<usize> = (0..segs.len()).filter(|&i| segs[i].stage == n).collect();
        let vertical = n % 2 == 1;
        let nf = (n + 1) as f64;
        let mut added = 0.0;
        for j in 0..teeth {
            let (i, c) = (j / comps.len(), j % comps.len());
            let parent = &segs[comps[c]];
            let t = van_der_corput(i);
            let a = parent.start.coords();
            let b = parent.end.coords();
            let base = [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t];
            let len = 1.0 / (((j + 1) * (j + 1)) as f64 * nf * nf);
            // components of K_n \ K_(n-1) vertical → new pieces horizontal
            let end = if vertical { [base[0] + len, base[1]] } else { [base[0], base[1] + len] };
            added += len;
            segs.push(CombSegment {
                start: Point::from(base),
                end: Point::from(end),
                stage: n + 1,
                index: j,
                parent: Some(comps[c]),
            });
        }
        stage_lengths.push(added);
    }
    let curve = walk_tree(&segs)?;
    Ok(Comb { stages, teeth, segments: segs, stage_lengths, curve })
}

/// Depth-first walk of the segment tree: along each segment, step into every
/// child at its attachment point, out to its end and straight back.
fn walk_tree(segs: &[CombSegment]) -> Result<PolylineCurve> {
    let mut children: Vec<Vec<(f64, usize)>> = vec![Vec::new(); segs.len()];
    for (i, s) in segs.iter().enumerate() {
        if let Some(p) = s.parent {
            let (a, b) = (segs[p].start.coords(), segs[p].end.coords());
            let c = s.start.coords();
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            let t = ((c[0] - a[0]) * (b[0] - a[0]) + (c[1] - a[1]) * (b[1] - a[1])) / len2;
            children[p].push((t, i));
        }
    }
    for c in &mut children {
        c.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    }
    fn push(out: &mut Vec<f64>, p: &[f64]) {
        if out.len() >= 2 && &out[out.len() - 2..] == p {
            return;
        }
        out.extend_from_slice(p);
    }
    fn visit(i: usize, segs: &[CombSegment], children: &[Vec<(f64, usize)>], out: &mut Vec<f64>) {
        push(out, segs[i].start.coords());
        for &(_, c) in &children[i] {
            visit(c, segs, children, out);
        }
        push(out, segs[i].end.coords());
        if segs[i].parent.is_some() {
            push(out, segs[i].start.coords());
        }
    }
    let mut out = Vec::new();
    visit(0, segs, &children, &mut out);
    PolylineCurve::from_flat(2, out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub point: Point,
    pub fine_scale: f64,
    pub coarse_scale: f64,
    pub discrepancy: f64,
}

/// Blowups at the tips of the last stage's teeth at two scales: `L/100`
/// (the tooth end looks like a ray) and `L/0.6` (the junction with the
/// parent shows up), with `L` the tooth length and `R = 1`.
pub fn nonuniqueness_probe(comb: &Comb, count: usize) -> Result<Vec<ProbeResult>> {
    let last: Vec<&CombSegment> = comb.segments.iter().filter(|s| s.stage == comb.stages).take(count).collect();
    last.iter()
        .map(|s| {
            let tip = s.end.coords();
            let l = s.start.dist(&s.end);
            let (fine, coarse) = (l / 100.0, l / 0.6);
            let a = curve_blowup(&comb.curve, tip, fine, 1.0)?;
            let b = curve_blowup(&comb.curve, tip, coarse, 1.0)?;
            Ok(ProbeResult {
                point: s.end.clone(),
                fine_scale: fine,
                coarse_scale: coarse,
                discrepancy: aw_discrepancy(a.base(), b.base(), 1.0)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::curve_limit;

    #[test]
    fn enumeration_prefix() {
        assert_eq!(rational_enumeration(7), vec![0.0, 1.0, 0.5, 1.0 / 3.0, 2.0 / 3.0, 0.25, 0.75]);
        assert_eq!((0..4).map(van_der_corput).collect::<Vec<_>>(), vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn stage_one_lengths() {
        let c = example_comb(1, 4).unwrap();
        let want = 1.0 + 0.25 + 1.0 / 16.0 + 1.0 / 36.0 + 1.0 / 64.0;
        assert!((c.length() - want).abs() < 1e-12, "{}", c.length());
        let first = &c.segments[1];
        assert_eq!(first.start, Point::from([0.0, 0.0]));
        assert_eq!(first.end, Point::from([0.0, 0.25]));
    }

    #[test]
    fn stage_lengths_summable() {
        let c = example_comb(4, 20).unwrap();
        for (n, l) in c.stage_lengths.iter().enumerate().skip(1) {
            let nf = (n + 1) as f64;
            assert!(*l <= std::f64::consts::PI.powi(2) / 6.0 / (nf * nf) + 1e-15);
        }
        // axes alternate: stage 2 horizontal, stage 3 vertical
        for s in &c.segments {
            let d = [s.end.coords()[0] - s.start.coords()[0], s.end.coords()[1] - s.start.coords()[1]];
            match s.stage {
                1 | 3 => assert_eq!(d[0], 0.0),
                2 | 4 => assert_eq!(d[1], 0.0),
                _ => {}
            }
        }
    }

    #[test]
    fn comb_limit_lengths_increase() {
        let curves: Vec<PolylineCurve> = (1..=4).map(|s| example_comb(s, 8).unwrap().curve).collect();
        let lens: Vec<f64> = curves.iter().map(PolylineCurve::image_length).collect();
        assert!(lens.windows(2).all(|w| w[1] > w[0]));
        curve_limit(&curves, 0.1).unwrap();
    }

    #[test]
    fn cantor_stack_shape() {
        let (set, meta) = example_cantor_stack(3, 3, 2).unwrap();
        assert!(set.points().all(|p| p[0] == 0.0));
        assert!(set.points().any(|p| p == [0.0, 0.0, 0.0]));
        assert_eq!(meta.pieces.len(), 2);
        assert_eq!(meta.pieces[0].dimension, 2f64.ln() / 3f64.ln());
        assert!((meta.pieces[0].dimension - 0.6309).abs() < 1e-4);
        let c2 = &example_cantor_stack(2, 2, 6).unwrap().1.pieces[0];
        assert!((c2.covering_lengths[5] - 0.0219).abs() < 1e-4);
        assert!(example_cantor_stack(2, 1, 2).is_err());
        assert!(example_cantor_stack(1, 3, 2).is_err());
    }

    #[test]
    fn cantor_piece_self_similar() {
        let e = cantor_piece_endpoints(3, 1);
        // three pieces of length (1/9)/4 spanning [0, 1/9]
        assert_eq!(e.len(), 6);
        assert_eq!(e[0], 0.0);
        assert!((e[5] - 1.0 / 9.0).abs() < 1e-16);
        for w in e.chunks(2) {
            assert!((w[1] - w[0] - 1.0 / 36.0).abs() < 1e-16);
        }
    }
}
