//! Polyline Lipschitz curves and Lipschitz captures of finite nets.
//!
//! A [`PolylineCurve`] is parametrized at constant speed on `[0, 1]`, so its
//! Lipschitz constant is exactly its total length.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::disconnect::SpanningTree;
use crate::error::{Error, Result};
use crate::geom::{dist, dist_sq, excess, DiscreteSet, Point};
use crate::kdtree::KdTree;

#[derive(Clone, Debug, PartialEq)]
pub struct PolylineCurve {
    dim: usize,
    verts: Vec<f64>,
    cum: Vec<f64>,
}

impl PolylineCurve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let dim = vertices.first().map(Point::dim).ok_or_else(|| {
            Error::DegenerateCurve("a curve needs at least two vertices".into())
        })?;
        let mut flat = Vec::with_capacity(vertices.len() * dim);
        for v in &vertices {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
            }
            flat.extend_from_slice(v.coords());
        }
        Self::from_flat(dim, flat)
    }

    pub fn from_flat(dim: usize, verts: Vec<f64>) -> Result<Self> {
        if dim == 0 || !verts.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter("bad vertex buffer".into()));
        }
        let n = verts.len() / dim;
        if n < 2 {
            return Err(Error::DegenerateCurve("a curve needs at least two vertices".into()));
        }
        if verts.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut cum = Vec::with_capacity(n);
        cum.push(0.0);
        for i in 1..n {
            let a = &verts[(i - 1) * dim..i * dim];
            let b = &verts[i * dim..(i + 1) * dim];
            if a == b {
                return Err(Error::DegenerateCurve(format!("vertices {} and {} coincide", i - 1, i)));
            }
            let next = cum[i - 1] + dist(a, b);
            if next <= cum[i - 1] {
                return Err(Error::DegenerateCurve(format!(
                    "segment {} is too short to register in the arc-length table",
                    i - 1
                )));
            }
            cum.push(next);
        }
        Ok(Self { dim, verts, cum })
    }

    /// Like [`from_flat`](Self::from_flat) but silently drops consecutive
    /// duplicate vertices first.
    pub fn from_flat_dedup(dim: usize, verts: Vec<f64>) -> Result<Self> {
        let mut out: Vec<f64> = Vec::with_capacity(verts.len());
        for v in verts.chunks_exact(dim) {
            if out.len() >= dim && &out[out.len() - dim..] == v {
                continue;
            }
            out.extend_from_slice(v);
        }
        Self::from_flat(dim, out)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.cum.len()
    }

    pub fn segment_count(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.verts[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.verts.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.verts
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.vertices().map(Point::from_slice).collect()
    }

    pub fn segment(&self, i: usize) -> (&[f64], &[f64]) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.cum[i + 1] - self.cum[i]
    }

    /// Cumulative arc length at vertex `i`.
    pub fn cumulative(&self, i: usize) -> f64 {
        self.cum[i]
    }

    /// Sum of segment lengths; also the Lipschitz constant of the
    /// constant-speed parametrization. Counts retraced pieces every time
    /// they are traversed (see [`image_length`](Self::image_length)).
    pub fn arc_length(&self) -> f64 {
        *self.cum.last().expect("≥ 2 vertices")
    }

    pub fn lipschitz(&self) -> f64 {
        self.arc_length()
    }

    pub fn vertex_param(&self, i: usize) -> f64 {
        if i + 1 == self.vertex_count() {
            1.0
        } else {
            self.cum[i] / self.arc_length()
        }
    }

    /// Segment index and offset along it (arc length) for parameter `t`.
    pub(crate) fn locate(&self, t: f64) -> (usize, f64) {
        let s = t * self.arc_length();
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let i = i.min(self.segment_count() - 1);
        (i, s - self.cum[i])
    }

    pub(crate) fn position(&self, t: f64) -> Vec<f64> {
        if t >= 1.0 {
            return self.vertex(self.vertex_count() - 1).to_vec();
        }
        if t <= 0.0 {
            return self.vertex(0).to_vec();
        }
        let (i, off) = self.locate(t);
        let (a, b) = self.segment(i);
        let u = (off / self.segment_length(i)).clamp(0.0, 1.0);
        a.iter().zip(b).map(|(p, q)| p + (q - p) * u).collect()
    }

    /// Constant-speed point at parameter `t ∈ [0, 1]`.
    pub fn evaluate(&self, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("parameter {t} outside [0, 1]")));
        }
        Point::new(self.position(t))
    }

    /// Parameter and distance of a closest point on the curve to `p`.
    pub fn closest_param(&self, p: &[f64]) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            let (u, d2) = project(p, a, b);
            if d2 < best.1 {
                let s = self.cum[i] + u * self.segment_length(i);
                best = (s / self.arc_length(), d2);
            }
        }
        (best.0.clamp(0.0, 1.0), best.1.sqrt())
    }

    pub fn distance_to(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        Ok(self.closest_param(p).1)
    }

    /// Samples of the curve inside `B̄(center, radius)`: every segment is
    /// clipped to the ball and sampled at spacing ≤ `step`, clip points
    /// included. `None` if the curve misses the ball.
    pub fn local_net(&self, center: &[f64], radius: f64, step: f64) -> Option<DiscreteSet> {
        let mut out = Vec::new();
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            if let Some((u0, u1)) = clip_to_ball(a, b, center, radius) {
                sample_piece(a, b, u0, u1, step, &mut out);
            }
        }
        if out.is_empty() {
            None
        } else {
            DiscreteSet::from_flat(self.dim, step / 2.0, out).ok()
        }
    }

    /// Net of the whole image at spacing ≤ `step`.
    pub fn sample(&self, step: f64) -> DiscreteSet {
        let mut out = Vec::new();
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            sample_piece(a, b, 0.0, 1.0, step, &mut out);
        }
        DiscreteSet::from_flat(self.dim, step / 2.0, out).expect("curve samples are finite")
    }

    /// ℋ¹ of the image: collinear overlapping segments (retraced teeth,
    /// doubled-back walks) are counted once. Crossings have measure zero.
    pub fn image_length(&self) -> f64 {
        let mut groups: HashMap<Vec<i64>, (Vec<f64>, Vec<(f64, f64)>)> = HashMap::new();
        for i in 0..self.segment_count() {
            let (mut a, mut b) = self.segment(i);
            if a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Greater) {
                std::mem::swap(&mut a, &mut b);
            }
            let len = dist(a, b);
            let mut u: Vec<f64> = a.iter().zip(b).map(|(x, y)| (y - x) / len).collect();
            if let Some(first) = u.iter().find(|c| c.abs() > 1e-12) {
                if *first < 0.0 {
                    u.iter_mut().for_each(|c| *c = -*c);
                }
            }
            let along: f64 = a.iter().zip(&u).map(|(x, y)| x * y).sum();
            let foot: Vec<f64> = a.iter().zip(&u).map(|(x, y)| x - along * y).collect();
            let key: Vec<i64> = u
                .iter()
                .map(|c| (c / 1e-9).round() as i64)
                .chain(foot.iter().map(|c| (c / 1e-12).round() as i64))
                .collect();
            let entry = groups.entry(key).or_insert_with(|| (u.clone(), Vec::new()));
            let dir = &entry.0;
            let pa: f64 = a.iter().zip(dir).map(|(x, y)| x * y).sum();
            let pb: f64 = b.iter().zip(dir).map(|(x, y)| x * y).sum();
            entry.1.push((pa.min(pb), pa.max(pb)));
        }
        let mut total = 0.0;
        for (_, (_, mut iv)) in groups {
            iv.sort_by(|x, y| x.0.total_cmp(&y.0));
            let (mut lo, mut hi) = iv[0];
            for &(a, b) in &iv[1..] {
                if a > hi {
                    total += hi - lo;
                    lo = a;
                    hi = b;
                } else {
                    hi = hi.max(b);
                }
            }
            total += hi - lo;
        }
        total
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.vertices().enumerate() {
            for q in self.vertices().skip(i + 1) {
                best = best.max(dist_sq(p, q));
            }
        }
        best.sqrt()
    }
}

/// Parameter `u ∈ [0,1]` of the point of `[a, b]` closest to `p`, and the
/// squared distance to it.
pub(crate) fn project(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut dd = 0.0;
    let mut fd = 0.0;
    for ((x, y), z) in a.iter().zip(b).zip(p) {
        let d = y - x;
        dd += d * d;
        fd += (z - x) * d;
    }
    let u = if dd > 0.0 { (fd / dd).clamp(0.0, 1.0) } else { 0.0 };
    let mut d2 = 0.0;
    for ((x, y), z) in a.iter().zip(b).zip(p) {
        let q = x + (y - x) * u;
        d2 += (z - q) * (z - q);
    }
    (u, d2)
}

/// Parameter interval of `[a, b]` inside the closed ball, computed through
/// the foot of the perpendicular so that tiny balls far from the origin keep
/// their relative accuracy.
pub(crate) fn clip_to_ball(a: &[f64], b: &[f64], c: &[f64], r: f64) -> Option<(f64, f64)> {
    let mut dd = 0.0;
    let mut fd = 0.0;
    for ((x, y), z) in a.iter().zip(b).zip(c) {
        let d = y - x;
        dd += d * d;
        fd += (z - x) * d;
    }
    let len = dd.sqrt();
    let u_star = fd / dd;
    let mut h2 = 0.0;
    for ((x, y), z) in a.iter().zip(b).zip(c) {
        let foot = (x - z) + (y - x) * u_star;
        h2 += foot * foot;
    }
    if h2 > r * r {
        return None;
    }
    let w = (r * r - h2).sqrt() / len;
    let (u0, u1) = ((u_star - w).max(0.0), (u_star + w).min(1.0));
    if u0 > u1 {
        return None;
    }
    Some((u0, u1))
}

fn sample_piece(a: &[f64], b: &[f64], u0: f64, u1: f64, step: f64, out: &mut Vec<f64>) {
    let len = dist(a, b) * (u1 - u0);
    let n = (len / step).ceil().max(1.0) as usize;
    for k in 0..=n {
        let u = if k == n { u1 } else { u0 + (u1 - u0) * (k as f64 / n as f64) };
        out.extend(a.iter().zip(b).map(|(x, y)| x + (y - x) * u));
    }
}

/// Evidence that a curve captures a net.
#[derive(Clone, Debug, PartialEq)]
pub struct CaptureCertificate {
    pub curve: PolylineCurve,
    pub captured: DiscreteSet,
    /// Max over captured points of the distance to the curve.
    pub coverage: f64,
    /// For each captured point, a parameter `t` with `|f(t) − k| ≤ ε`.
    pub parameters: Vec<f64>,
}

impl CaptureCertificate {
    /// Verifies that `curve` passes within the net resolution of every point.
    pub fn certify(curve: PolylineCurve, captured: DiscreteSet) -> Result<Self> {
        if curve.dimension() != captured.dimension() {
            return Err(Error::DimensionMismatch { expected: captured.dimension(), found: curve.dimension() });
        }
        let tree = KdTree::new(curve.dim, &curve.verts);
        let tol = captured.dedup_tolerance();
        let mut coverage = 0.0f64;
        let mut parameters = Vec::with_capacity(captured.len());
        for k in captured.points() {
            let (vi, d2) = tree.nearest(k);
            let (t, d) = if d2.sqrt() <= tol { (curve.vertex_param(vi), d2.sqrt()) } else { curve.closest_param(k) };
            coverage = coverage.max(d);
            parameters.push(t);
        }
        if coverage > captured.resolution() {
            return Err(Error::InvalidParameter(format!(
                "not a capture: coverage {coverage} exceeds resolution {}",
                captured.resolution()
            )));
        }
        Ok(Self { curve, captured, coverage, parameters })
    }
}

/// A capture visiting the net in depth-first order of its minimum spanning
/// tree, shortcutting repeated vertices. Length ≤ 2·(tree weight).
pub fn base_capture(k: &DiscreteSet) -> Result<CaptureCertificate> {
    if k.len() < 2 {
        return Err(Error::SingletonSet);
    }
    let tree = SpanningTree::new(k);
    let mut order = Vec::with_capacity(k.len());
    let mut seen = vec![false; k.len()];
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        order.push(u);
        for &(v, _) in tree.neighbors(u).iter().rev() {
            if !seen[v] {
                stack.push(v);
            }
        }
    }
    let flat: Vec<f64> = order.iter().flat_map(|&i| k.point(i).iter().copied()).collect();
    let curve = PolylineCurve::from_flat(k.dimension(), flat)?;
    let mut parameters = vec![0.0; k.len()];
    for (pos, &i) in order.iter().enumerate() {
        parameters[i] = curve.vertex_param(pos);
    }
    Ok(CaptureCertificate { curve, captured: k.clone(), coverage: 0.0, parameters })
}

/// Moves `t` to a parameter whose image sits in the interior of a segment,
/// at least a tenth of the segment length from either end, with no other
/// segment passing within a twentieth of the segment length.
pub fn density_one_parameter(curve: &PolylineCurve, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("parameter {t} outside (0, 1)")));
    }
    let (mut i, mut off) = curve.locate(t);
    if off == 0.0 && i > 0 && curve.segment_length(i - 1) > curve.segment_length(i) {
        i -= 1;
        off = curve.segment_length(i);
    }
    let len = curve.segment_length(i);
    let margin = len / 10.0;
    let window = len / 20.0;
    let (a, b) = curve.segment(i);
    let clear = |o: f64| -> bool {
        let u = o / len;
        let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + (y - x) * u).collect();
        (0..curve.segment_count()).filter(|&j| j != i).all(|j| {
            let (c, d) = curve.segment(j);
            project(&p, c, d).1 > window * window
        })
    };
    let start = off.clamp(margin, len - margin);
    const STEPS: usize = 1000;
    let delta = len / STEPS as f64;
    for k in 0..=STEPS {
        for o in [start - k as f64 * delta, start + k as f64 * delta] {
            if o >= margin && o <= len - margin && clear(o) {
                return Ok(((curve.cum[i] + o) / curve.arc_length()).clamp(0.0, 1.0));
            }
        }
    }
    Err(Error::NoDensityPoint)
}

/// Output of [`gap_interval`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInterval {
    pub s: f64,
    pub t: f64,
    pub zeta: f64,
}

/// Parameters of `[lo, hi]` where the curve passes within `tol` of the net,
/// as sorted disjoint closed intervals.
fn touch_intervals(g: &PolylineCurve, k: &DiscreteSet, lo: f64, hi: f64, tol: f64) -> Vec<(f64, f64)> {
    let tree = KdTree::new(k.dimension(), k.flat());
    let big_l = g.arc_length();
    let mut raw = Vec::new();
    let mut near = Vec::new();
    for i in 0..g.segment_count() {
        let (t0, t1) = (g.cum[i] / big_l, g.cum[i + 1] / big_l);
        if t1 < lo || t0 > hi {
            continue;
        }
        let (a, b) = g.segment(i);
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        near.clear();
        tree.within(&mid, 0.5 * g.segment_length(i) + tol, &mut near);
        for &j in &near {
            if let Some((u0, u1)) = clip_to_ball(a, b, k.point(j), tol) {
                let s0 = (g.cum[i] + u0 * g.segment_length(i)) / big_l;
                let s1 = (g.cum[i] + u1 * g.segment_length(i)) / big_l;
                if s1 >= lo && s0 <= hi {
                    raw.push((s0.max(lo), s1.min(hi)));
                }
            }
        }
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in raw {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

/// Finds a complementary interval `(s, t)` of the curve's visits to `K`
/// between parameters `a` and `b` whose endpoints are more than
/// `λ·|g(a) − g(b)|` apart, together with a parameter `zeta` inside it whose
/// image is farther than `λ|g(a) − g(b)|/4` from `K` and passes
/// [`density_one_parameter`].
///
/// Visits to `K` are taken at the net's dedup tolerance `ε/100`, the finite
/// stand-in for `g⁻¹(K)`. Candidate intervals are tried in decreasing order
/// of endpoint separation (ties: smaller `s`).
pub fn gap_interval(g: &PolylineCurve, k: &DiscreteSet, a: f64, b: f64, lambda: f64) -> Result<GapInterval> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::InvalidParameter("a and b must lie in [0, 1]".into()));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    if g.dimension() != k.dimension() {
        return Err(Error::DimensionMismatch { expected: k.dimension(), found: g.dimension() });
    }
    let (ga, gb) = (g.position(a), g.position(b));
    for p in [&ga, &gb] {
        let d = k.nearest(p).1;
        if d > k.resolution() {
            return Err(Error::NotOnSet { distance: d, resolution: k.resolution() });
        }
    }
    let sep = dist(&ga, &gb);
    if sep == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let touches = touch_intervals(g, k, lo, hi, k.dedup_tolerance());
    let mut cands: Vec<(f64, f64, f64)> = touches
        .windows(2)
        .map(|w| (w[0].1, w[1].0))
        .filter(|(s, t)| s < t)
        .map(|(s, t)| (s, t, dist(&g.position(s), &g.position(t))))
        .filter(|c| c.2 > lambda * sep)
        .collect();
    cands.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.total_cmp(&y.0)));

    let need = 0.25 * lambda * sep;
    let tree = KdTree::new(k.dimension(), k.flat());
    let dist_k = |t: f64| tree.nearest(&g.position(t)).1.sqrt();
    for (s, t, _) in cands {
        let span = (t - s) * g.arc_length();
        let n = ((span / (0.5 * k.resolution())).ceil() as usize).clamp(64, 200_000);
        let mut scan: Vec<(f64, f64)> =
            (1..n).map(|i| s + (t - s) * i as f64 / n as f64).map(|z| (z, dist_k(z))).collect();
        scan.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
        for &(z, d) in scan.iter().take(16) {
            if d <= need {
                break;
            }
            let Ok(zeta) = density_one_parameter(g, z) else { continue };
            if zeta > s && zeta < t && dist_k(zeta) > need {
                return Ok(GapInterval { s, t, zeta });
            }
        }
    }
    Err(Error::NoGap)
}

/// Result of [`curve_limit`].
#[derive(Clone, Debug, PartialEq)]
pub struct CurveLimit {
    pub curve: PolylineCurve,
    /// Hausdorff distances between consecutive stages (sampled).
    pub gaps: Vec<f64>,
    pub lengths: Vec<f64>,
    /// First index of the tail used by the semicontinuity check.
    pub tail_start: usize,
}

/// Hausdorff distance between two curves sampled at spacing `step`.
pub fn curve_hausdorff(a: &PolylineCurve, b: &PolylineCurve, step: f64) -> Result<f64> {
    let (sa, sb) = (a.sample(step), b.sample(step));
    Ok(excess(&sa, &sb)?.max(excess(&sb, &sa)?))
}

/// Checks `ℋ¹(limit) ≤ min over the tail of ℋ¹(curveₙ) + tol`, where the
/// tail is every stage whose remaining Hausdorff gaps sum to at most `tol`.
/// Returns the tail start.
pub fn length_semicontinuity(curves: &[PolylineCurve], gaps: &[f64], tol: f64) -> Result<usize> {
    let lengths: Vec<f64> = curves.iter().map(PolylineCurve::image_length).collect();
    let n = curves.len();
    let mut tail_start = n - 1;
    let mut acc = 0.0;
    for i in (0..n - 1).rev() {
        acc += gaps[i];
        if acc <= tol {
            tail_start = i;
        } else {
            break;
        }
    }
    let tail_min = lengths[tail_start..].iter().copied().fold(f64::INFINITY, f64::min);
    let limit = lengths[n - 1];
    if limit > tail_min + tol {
        return Err(Error::Semicontinuity { limit, tail_min, tol });
    }
    Ok(tail_start)
}

/// The last stage of a Hausdorff-Cauchy sequence of curves, after checking
/// that the final gap is within `tol`, that the limit is a nondegenerate
/// continuum, and that length is lower semicontinuous along the tail.
pub fn curve_limit(curves: &[PolylineCurve], tol: f64) -> Result<CurveLimit> {
    if curves.len() < 2 {
        return Err(Error::InvalidParameter("curve_limit needs at least two curves".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let dim = curves[0].dimension();
    if let Some(c) = curves.iter().find(|c| c.dimension() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: c.dimension() });
    }
    let last = curves.last().expect("nonempty");
    let diameter = last.diameter();
    if diameter <= tol {
        return Err(Error::DegenerateLimit { diameter, tol });
    }
    let gaps = curves
        .windows(2)
        .map(|w| curve_hausdorff(&w[0], &w[1], tol / 4.0))
        .collect::<Result<Vec<_>>>()?;
    let final_gap = *gaps.last().expect("≥ 1 gap");
    if final_gap > tol {
        return Err(Error::NonCauchy { gap: final_gap, tol });
    }
    let tail_start = length_semicontinuity(curves, &gaps, tol)?;
    Ok(CurveLimit {
        curve: last.clone(),
        gaps,
        lengths: curves.iter().map(PolylineCurve::image_length).collect(),
        tail_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cantor_net, segment_net};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn curve(pts: &[[f64; 2]]) -> PolylineCurve {
        PolylineCurve::new(pts.iter().map(|p| Point::from(*p)).collect()).unwrap()
    }

    /// ℋ¹(curve ∩ B(p, ρ)) / (2ρ), summing clipped segment lengths.
    fn mass_ratio(c: &PolylineCurve, p: &[f64], rho: f64) -> f64 {
        let mut m = 0.0;
        for i in 0..c.segment_count() {
            let (a, b) = c.segment(i);
            if let Some((u0, u1)) = clip_to_ball(a, b, p, rho) {
                m += (u1 - u0) * dist(a, b);
            }
        }
        m / (2.0 * rho)
    }

    #[test]
    fn evaluate_examples() {
        let seg = curve(&[[0.0, 0.0], [2.0, 0.0]]);
        assert_eq!(seg.evaluate(0.5).unwrap(), Point::from([1.0, 0.0]));
        let l = curve(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        assert_eq!(l.evaluate(0.5).unwrap(), Point::from([1.0, 0.0]));
        assert_eq!(l.evaluate(0.0).unwrap(), Point::from([0.0, 0.0]));
        assert_eq!(l.evaluate(1.0).unwrap(), Point::from([1.0, 1.0]));
        assert!(l.evaluate(1.5).is_err());
        assert!(l.evaluate(-0.1).is_err());
    }

    #[test]
    fn lipschitz_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point> = (0..30).map(|_| Point::from([rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])).collect();
        let c = PolylineCurve::new(pts).unwrap();
        let lip = c.lipschitz();
        for _ in 0..1000 {
            let (t, s): (f64, f64) = (rng.gen(), rng.gen());
            let d = c.evaluate(t).unwrap().dist(&c.evaluate(s).unwrap());
            assert!(d <= lip * (t - s).abs() + 1e-12 * lip);
        }
    }

    #[test]
    fn construction_rejects_degenerate_input() {
        assert!(PolylineCurve::new(vec![Point::from([0.0, 0.0])]).is_err());
        assert!(PolylineCurve::new(vec![Point::from([0.0, 0.0]), Point::from([0.0, 0.0])]).is_err());
        assert!(PolylineCurve::new(vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0, 0.0])]).is_err());
    }

    #[test]
    fn lengths() {
        assert_eq!(curve(&[[0.0, 0.0], [1.0, 0.0]]).arc_length(), 1.0);
        let sq = curve(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(sq.arc_length(), 4.0);
        assert_eq!(sq.image_length(), 4.0);
        let back = curve(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]]);
        assert_eq!(back.arc_length(), 1.5);
        assert_eq!(back.image_length(), 1.0);
    }

    #[test]
    fn base_capture_examples() {
        let two = DiscreteSet::new(2, 0.01, vec![Point::from([0.0, 0.0]), Point::from([3.0, 4.0])]).unwrap();
        let c = base_capture(&two).unwrap();
        assert_eq!(c.curve.arc_length(), 5.0);
        assert_eq!(c.coverage, 0.0);

        let sq = DiscreteSet::new(
            2,
            0.01,
            vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([1.0, 1.0]), Point::from([0.0, 1.0])],
        )
        .unwrap();
        let c = base_capture(&sq).unwrap();
        assert!(c.curve.arc_length() <= 6.0);

        // brute-force oracle: Kruskal over all 120 edges of the 16-point net
        let k = cantor_net(3);
        let mut edges = Vec::new();
        for i in 0..k.len() {
            for j in i + 1..k.len() {
                edges.push((dist(k.point(i), k.point(j)), i, j));
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut comp: Vec<usize> = (0..k.len()).collect();
        let mut w = 0.0;
        for (d, i, j) in edges {
            let (ci, cj) = (comp[i], comp[j]);
            if ci != cj {
                w += d;
                comp.iter_mut().for_each(|c| {
                    if *c == cj {
                        *c = ci
                    }
                });
            }
        }
        assert!((w - 1.0).abs() < 1e-12);
        let c = base_capture(&k).unwrap();
        assert!(c.curve.arc_length() <= 2.0 * w + 1e-12);
        for (i, &t) in c.parameters.iter().enumerate() {
            assert!(dist(&c.curve.position(t), k.point(i)) == 0.0);
        }
        assert!(base_capture(&DiscreteSet::new(2, 0.1, vec![Point::from([0.0, 0.0])]).unwrap()).is_err());
    }

    #[test]
    fn density_examples() {
        let seg = curve(&[[0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(density_one_parameter(&seg, 0.5).unwrap(), 0.5);

        let l = curve(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let t = density_one_parameter(&l, 0.5).unwrap();
        assert!((t - 0.45).abs() < 1e-12 || (t - 0.55).abs() < 1e-12, "{t}");

        // bow tie: the two diagonals cross at (1, 0), midpoint of segment 0
        let eight = curve(&[[0.0, -1.0], [2.0, 1.0], [2.0, -1.0], [0.0, 1.0], [0.0, -1.0]]);
        let t_cross = 0.5 * eight.segment_length(0) / eight.arc_length();
        let p = eight.position(t_cross);
        assert!(dist(&p, &[1.0, 0.0]) < 1e-12);
        assert!(mass_ratio(&eight, &p, 1e-3) > 1.5);
        let moved = density_one_parameter(&eight, t_cross).unwrap();
        assert!(moved != t_cross);
        let q = eight.position(moved);
        for rho in [1e-2, 1e-3, 1e-4] {
            assert!((mass_ratio(&eight, &q, rho) - 1.0).abs() < 1e-9, "rho {rho}");
        }
    }

    #[test]
    fn gap_interval_single_gap() {
        let k = DiscreteSet::new(2, 0.01, vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0])]).unwrap();
        let g = curve(&[[0.0, 0.0], [1.0, 0.0]]);
        let gi = gap_interval(&g, &k, 0.0, 1.0, 0.9).unwrap();
        assert!(gi.s < 1e-3 && gi.t > 1.0 - 1e-3);
        assert!((gi.zeta - 0.5).abs() < 0.02);
        assert!(k.distance_to(&g.position(gi.zeta)).unwrap() > 0.25 * 0.9);
    }

    fn preimage(c: &CaptureCertificate, p: &[f64]) -> f64 {
        c.parameters[c.captured.nearest(p).0]
    }

    #[test]
    fn gap_interval_cantor_central_gap() {
        let k = cantor_net(2);
        let cap = base_capture(&k).unwrap();
        let (a, b) = (preimage(&cap, &[0.0, 0.0]), preimage(&cap, &[1.0, 0.0]));
        // the central gap has length exactly λ·|x − y| for λ = 1/3: the
        // strict inequality cannot hold, so the search reports no gap
        assert!(matches!(gap_interval(&cap.curve, &k, a, b, 1.0 / 3.0), Err(Error::NoGap)));

        let lambda = 0.3;
        let gi = gap_interval(&cap.curve, &k, a, b, lambda).unwrap();
        let z = cap.curve.position(gi.zeta);
        assert!(z[0] > 1.0 / 3.0 && z[0] < 2.0 / 3.0);
        let d = k.distance_to(&z).unwrap();
        assert!(d > 1.0 / 12.0, "{d}");

        // independent audit scan at parameter step ε/(2·Lip)
        let lip = cap.curve.lipschitz();
        let step = k.resolution() / (2.0 * lip);
        let n = ((gi.t - gi.s) / step).ceil() as usize;
        for i in 1..n {
            let t = gi.s + (gi.t - gi.s) * i as f64 / n as f64;
            assert!(k.distance_to(&cap.curve.position(t)).unwrap() > k.dedup_tolerance());
        }
        let sep = dist(&cap.curve.position(gi.s), &cap.curve.position(gi.t));
        assert!(sep > lambda);
        assert!((gi.t - gi.s) > lambda / lip);
        assert!(d > 0.25 * lambda);
    }

    #[test]
    fn gap_interval_dense_net_has_no_gap() {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01);
        let g = curve(&[[0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(gap_interval(&g, &k, 0.0, 1.0, 0.3), Err(Error::NoGap)));
    }

    #[test]
    fn limit_examples() {
        let c = curve(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let lim = curve_limit(&[c.clone(), c.clone(), c.clone()], 0.01).unwrap();
        assert_eq!(lim.curve, c);
        assert_eq!(lim.tail_start, 0);

        let shrinking: Vec<PolylineCurve> =
            (0..6).map(|i| curve(&[[0.0, 0.0], [0.5f64.powi(3 * i), 0.0]])).collect();
        assert!(matches!(curve_limit(&shrinking, 0.01), Err(Error::DegenerateLimit { .. })));

        let jumpy = vec![curve(&[[0.0, 0.0], [1.0, 0.0]]), curve(&[[0.0, 1.0], [1.0, 1.0]])];
        assert!(matches!(curve_limit(&jumpy, 0.01), Err(Error::NonCauchy { .. })));
    }

    #[test]
    fn local_net_clips_to_ball() {
        let c = curve(&[[-1.0, 0.0], [1.0, 0.0]]);
        let n = c.local_net(&[0.0, 0.0], 0.5, 0.01).unwrap();
        assert!(n.points().all(|p| dist(p, &[0.0, 0.0]) <= 0.5 + 1e-15));
        assert!(n.points().any(|p| (p[0] - 0.5).abs() < 1e-15));
        assert!(n.points().any(|p| (p[0] + 0.5).abs() < 1e-15));
        assert!(c.local_net(&[0.0, 2.0], 0.5, 0.01).is_none());
    }
}
