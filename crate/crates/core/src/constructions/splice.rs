//! Inserting scaled copies of `H` into a capture near a point `x ∈ K`.
//!
//! For each `yₙ` the gap finder gives a site `g(ζₙ)` well away from `K`.
//! The curve is cut inside `B(site, λ|x−yₙ|/16)`; strands that do not carry
//! `ζₙ` are rejoined along great circles of the sphere, and the strand that
//! does is routed into `Hₙ = λ|x−yₙ|/(32√d)·H + site` and back out.

use serde::{Deserialize, Serialize};

use super::sphere::{angle_step, geodesic, unit};
use crate::curves::{clip_to_ball, gap_interval, CaptureCertificate, PolylineCurve};
use crate::error::{Error, Result};
use crate::geom::{dist, norm, DiscreteSet, Point};

const MAX_ARC_STEP: f64 = std::f64::consts::PI / 6.0;

pub fn ball_radius(lambda: f64, gap: f64) -> f64 {
    lambda * gap / 16.0
}

pub fn copy_scale(lambda: f64, gap: f64, dim: usize) -> f64 {
    lambda * gap / (32.0 * (dim as f64).sqrt())
}

/// One replaced strand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reroute {
    /// `"geodesic"` or `"copy"`.
    pub kind: String,
    pub from: Point,
    pub to: Point,
    pub removed_length: f64,
    pub added_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpliceRecord {
    pub site: Point,
    pub y: Point,
    pub zeta: f64,
    pub gap_witness: f64,
    pub ball_radius: f64,
    pub copy_scale: f64,
    pub reroutes: Vec<Reroute>,
    pub length_delta: f64,
}

/// A site chosen for one `yₙ`, before the curve is modified.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteCandidate {
    pub index: usize,
    pub y: Point,
    pub gap_witness: f64,
    pub zeta: f64,
    pub site: Point,
    pub ball_radius: f64,
    pub copy_scale: f64,
}

/// Greedy scan in index order keeping `i` iff its ball
/// `B(sites[i], λ|x−ys[i]|/16)` misses every ball kept so far.
pub fn select_disjoint_subsequence(x: &[f64], ys: &[Point], sites: &[Point], lambda: f64) -> Result<Vec<usize>> {
    if ys.len() != sites.len() {
        return Err(Error::InvalidParameter(format!("{} ys for {} sites", ys.len(), sites.len())));
    }
    let radii: Vec<f64> = ys.iter().map(|y| ball_radius(lambda, dist(x, y.coords()))).collect();
    let kept = greedy_disjoint(sites, &radii);
    if kept.len() < 2 {
        return Err(Error::TooFewSites);
    }
    Ok(kept)
}

pub(crate) fn greedy_disjoint(sites: &[Point], radii: &[f64]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..sites.len() {
        if kept.iter().all(|&j| sites[i].dist(&sites[j]) > radii[i] + radii[j]) {
            kept.push(i);
        }
    }
    kept
}

/// Parameter of a captured point within the net resolution of `p`.
pub(crate) fn preimage(g: &CaptureCertificate, p: &[f64]) -> Result<f64> {
    let (i, d) = g.captured.nearest(p);
    if d > g.captured.resolution() {
        return Err(Error::NotOnSet { distance: d, resolution: g.captured.resolution() });
    }
    Ok(g.parameters[i])
}

/// Runs the gap finder between `x` and every `yₙ`.
pub fn plan_sites(g: &CaptureCertificate, k: &DiscreteSet, x: &[f64], ys: &[Point], lambda: f64) -> Result<Vec<SiteCandidate>> {
    let dim = k.dimension();
    let a = preimage(g, x)?;
    let mut seen: Vec<&Point> = Vec::new();
    ys.iter()
        .enumerate()
        .map(|(index, y)| {
            if seen.contains(&y) || dist(x, y.coords()) == 0.0 {
                return Err(Error::CoincidentPoints);
            }
            seen.push(y);
            let b = preimage(g, y.coords())?;
            let gi = gap_interval(&g.curve, k, a, b, lambda)?;
            let gap = dist(x, y.coords());
            Ok(SiteCandidate {
                index,
                y: y.clone(),
                gap_witness: gap,
                zeta: gi.zeta,
                site: Point::new(g.curve.position(gi.zeta))?,
                ball_radius: ball_radius(lambda, gap),
                copy_scale: copy_scale(lambda, gap, dim),
            })
        })
        .collect()
}

struct Strand {
    site: usize,
    start: f64,
    end: f64,
    from: Vec<f64>,
    to: Vec<f64>,
    carries_zeta: bool,
}

fn strands(curve: &PolylineCurve, sites: &[SiteCandidate]) -> Vec<Strand> {
    let big_l = curve.arc_length();
    let mut out = Vec::new();
    for (si, s) in sites.iter().enumerate() {
        let z = s.site.coords();
        let mut cur: Option<Strand> = None;
        for i in 0..curve.segment_count() {
            let (a, b) = curve.segment(i);
            let Some((u0, u1)) = clip_to_ball(a, b, z, s.ball_radius) else { continue };
            let len = curve.segment_length(i);
            let (p0, p1) = (curve.cumulative(i) + u0 * len, curve.cumulative(i) + u1 * len);
            let at = |u: f64| -> Vec<f64> {
                if u == 0.0 {
                    a.to_vec()
                } else if u == 1.0 {
                    b.to_vec()
                } else {
                    a.iter().zip(b).map(|(x, y)| x + (y - x) * u).collect()
                }
            };
            match cur.as_mut() {
                Some(st) if st.end == p0 && u0 == 0.0 => {
                    st.end = p1;
                    st.to = at(u1);
                }
                _ => {
                    if let Some(st) = cur.take() {
                        out.push(st);
                    }
                    cur = Some(Strand { site: si, start: p0, end: p1, from: at(u0), to: at(u1), carries_zeta: false });
                }
            }
        }
        out.extend(cur);
    }
    out.retain(|st| st.end > st.start);
    for st in &mut out {
        let zeta_pos = sites[st.site].zeta * big_l;
        st.carries_zeta = st.start < zeta_pos && zeta_pos < st.end;
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    out
}

fn push(out: &mut Vec<f64>, dim: usize, p: &[f64]) {
    let n = out.len();
    if n >= dim {
        let last = &out[n - dim..];
        if last == p || dist(last, p) <= 1e-15 * (1.0 + norm(p)) {
            return;
        }
    }
    out.extend_from_slice(p);
}

fn polyline_length(pts: &[Vec<f64>]) -> f64 {
    pts.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Vertices of `c·H + z`, computed coordinate-wise as `c * h + z`.
pub fn copy_vertices(h: &PolylineCurve, scale: f64, site: &[f64]) -> Vec<Vec<f64>> {
    h.vertices().map(|v| v.iter().zip(site).map(|(a, z)| scale * a + z).collect()).collect()
}

fn copy_route(st: &Strand, s: &SiteCandidate, h: &PolylineCurve, chord_error: f64) -> Vec<Vec<f64>> {
    let z = s.site.coords();
    let dim = z.len();
    let c = s.copy_scale;
    let rho_m = 1.5 * (dim as f64).sqrt() * c;
    let mut hv = copy_vertices(h, c, z);
    if dist(&st.from, &hv[0]) > dist(&st.from, hv.last().expect("≥ 2")) {
        hv.reverse();
    }
    let rel = |p: &[f64]| -> Vec<f64> { unit(&p.iter().zip(z).map(|(a, b)| a - b).collect::<Vec<_>>()) };
    let on_mid = |u: &[f64]| -> Vec<f64> { z.iter().zip(u).map(|(a, b)| a + rho_m * b).collect() };
    let step = angle_step(rho_m, chord_error, MAX_ARC_STEP);
    let mut pts = vec![st.from.clone()];
    let (dp, d1) = (rel(&st.from), rel(&hv[0]));
    pts.push(on_mid(&dp));
    pts.extend(geodesic(z, rho_m, &dp, &d1, step, None));
    pts.extend(hv.iter().cloned());
    let (d2, dq) = (rel(hv.last().expect("≥ 2")), rel(&st.to));
    pts.push(on_mid(&d2));
    pts.extend(geodesic(z, rho_m, &d2, &dq, step, None));
    pts.push(st.to.clone());
    pts
}

/// Splices `H` copies at the given sites (assumed to have pairwise disjoint
/// balls). Returns the new capture and one record per site.
pub fn apply_splice(
    g: &CaptureCertificate,
    k: &DiscreteSet,
    sites: &[SiteCandidate],
    h: &PolylineCurve,
) -> Result<(CaptureCertificate, Vec<SpliceRecord>)> {
    let dim = k.dimension();
    if h.dimension() != dim || g.curve.dimension() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.dimension() });
    }
    if h.vertices().any(|v| v.iter().any(|c| c.abs() > 1.0)) {
        return Err(Error::InvalidParameter("H must lie in the cube [-1, 1]^d".into()));
    }
    for s in sites {
        let d = k.nearest(s.site.coords()).1;
        if d <= s.ball_radius {
            return Err(Error::InvalidParameter(format!(
                "excision ball at {:?} would contain net points",
                s.site.coords()
            )));
        }
    }
    let chord_error = k.resolution() / 4.0;
    let strands = strands(&g.curve, sites);
    let mut records: Vec<SpliceRecord> = sites
        .iter()
        .map(|s| SpliceRecord {
            site: s.site.clone(),
            y: s.y.clone(),
            zeta: s.zeta,
            gap_witness: s.gap_witness,
            ball_radius: s.ball_radius,
            copy_scale: s.copy_scale,
            reroutes: Vec::new(),
            length_delta: 0.0,
        })
        .collect();
    for (si, s) in sites.iter().enumerate() {
        if !strands.iter().any(|st| st.site == si && st.carries_zeta) {
            return Err(Error::InvalidParameter(format!("no strand carries ζ at site {si} ({:?})", s.site.coords())));
        }
    }

    let curve = &g.curve;
    let n = curve.vertex_count();
    let mut out: Vec<f64> = Vec::with_capacity(curve.flat().len());
    let mut i = 0;
    for st in &strands {
        while i < n && curve.cumulative(i) < st.start {
            push(&mut out, dim, curve.vertex(i));
            i += 1;
        }
        let s = &sites[st.site];
        let (kind, route) = if st.carries_zeta {
            ("copy", copy_route(st, s, h, chord_error))
        } else {
            let z = s.site.coords();
            let rel = |p: &[f64]| -> Vec<f64> { unit(&p.iter().zip(z).map(|(a, b)| a - b).collect::<Vec<_>>()) };
            let step = angle_step(s.ball_radius, chord_error, MAX_ARC_STEP);
            let mut pts = vec![st.from.clone()];
            pts.extend(geodesic(z, s.ball_radius, &rel(&st.from), &rel(&st.to), step, Some(&st.to)));
            ("geodesic", pts)
        };
        for p in &route {
            push(&mut out, dim, p);
        }
        let added = polyline_length(&route);
        let removed = st.end - st.start;
        let rec = &mut records[st.site];
        rec.length_delta += added - removed;
        rec.reroutes.push(Reroute {
            kind: kind.into(),
            from: Point::new(st.from.clone())?,
            to: Point::new(st.to.clone())?,
            removed_length: removed,
            added_length: added,
        });
        while i < n && curve.cumulative(i) <= st.end {
            i += 1;
        }
    }
    while i < n {
        push(&mut out, dim, curve.vertex(i));
        i += 1;
    }
    let f = PolylineCurve::from_flat(dim, out)?;
    let cert = CaptureCertificate::certify(f, k.clone())?;
    Ok((cert, records))
}

/// Plans, filters and applies a splice at `x`, rejecting it if the added
/// length reaches `delta`.
pub fn splice(
    g: &CaptureCertificate,
    k: &DiscreteSet,
    x: &[f64],
    ys: &[Point],
    h: &PolylineCurve,
    lambda: f64,
    delta: f64,
) -> Result<(CaptureCertificate, Vec<SpliceRecord>)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    let d = k.distance_to(x)?;
    if d > k.resolution() {
        return Err(Error::NotOnSet { distance: d, resolution: k.resolution() });
    }
    let plan = plan_sites(g, k, x, ys, lambda)?;
    let sites: Vec<Point> = plan.iter().map(|s| s.site.clone()).collect();
    let keep = select_disjoint_subsequence(x, ys, &sites, lambda)?;
    let chosen: Vec<SiteCandidate> = keep.iter().map(|&i| plan[i].clone()).collect();
    let (f, records) = apply_splice(g, k, &chosen, h)?;
    let needed: f64 = records.iter().map(|r| r.length_delta).sum();
    if needed >= delta {
        return Err(Error::BudgetInfeasible { needed, budget: delta });
    }
    Ok((f, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_h, target_library};
    use crate::curves::base_capture;

    #[test]
    fn formula_examples() {
        assert!((ball_radius(0.3, 0.09) - 0.0016875).abs() < 1e-15);
        let c = copy_scale(0.3, 0.09, 2);
        assert!((c - 5.966e-4).abs() < 1e-7, "{c}");
        for d in 2..6 {
            let r = ball_radius(0.3, 0.09) / copy_scale(0.3, 0.09, d);
            assert!((r - 2.0 * (d as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_selection() {
        let x = [0.0, 0.0];
        let ys: Vec<Point> = [0.5, 0.25, 0.125].iter().map(|&v| Point::from([v, 0.0])).collect();
        let far: Vec<Point> = [0.0, 1.0, 2.0].iter().map(|&v| Point::from([v, 5.0])).collect();
        assert_eq!(select_disjoint_subsequence(&x, &ys, &far, 0.5).unwrap(), vec![0, 1, 2]);
        let same = vec![Point::from([1.0, 1.0]), Point::from([1.0, 1.0]), Point::from([9.0, 9.0])];
        assert_eq!(select_disjoint_subsequence(&x, &ys, &same, 0.5).unwrap(), vec![0, 2]);
        let clash = vec![Point::from([1.0, 1.0]), Point::from([1.0, 1.0])];
        assert!(matches!(select_disjoint_subsequence(&x, &ys[..2], &clash, 0.5), Err(Error::TooFewSites)));
    }

    #[test]
    fn single_strand_splice_on_segment() {
        let k = DiscreteSet::new(2, 0.01, vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([0.4, 0.0])])
            .unwrap();
        let g = base_capture(&k).unwrap();
        let lib = target_library(2, 1.0, 3).unwrap();
        let h = build_h(2, &lib, 6).unwrap().curve;
        let x = [0.0, 0.0];
        let ys = vec![Point::from([1.0, 0.0]), Point::from([0.4, 0.0])];
        let (f, recs) = splice(&g, &k, &x, &ys, &h, 0.45, 10.0).unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert_eq!(r.reroutes.len(), 1);
            assert_eq!(r.reroutes[0].kind, "copy");
            // connectors plus the copy stay below λ|x − y|
            assert!(r.reroutes[0].added_length <= 0.45 * r.gap_witness, "{r:?}");
        }
        let total: f64 = recs.iter().map(|r| r.length_delta).sum();
        assert!((f.curve.arc_length() - g.curve.arc_length() - total).abs() < 1e-12);
        assert_eq!(f.coverage, 0.0);
    }
}
