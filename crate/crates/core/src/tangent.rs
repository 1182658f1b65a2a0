//! Blowups and finite-resolution tangent / pseudotangent checks.
//!
//! A check fixes one truncation radius `R` (the one carried by the target)
//! and walks a decreasing scale schedule, recording the Attouch–Wets
//! discrepancy between each rescaled copy and the target. The verdict looks
//! only at the last row; the full profile is kept for inspection.

use serde::{Deserialize, Serialize};

use crate::curves::PolylineCurve;
use crate::error::{Error, Result};
use crate::geom::{aw_discrepancy, dist, norm, translate_scale, DiscreteSet, Point};
use crate::kdtree::KdTree;

/// Component-graph threshold and sphere slack, in units of the net resolution.
pub const COMPONENT_SLACK: f64 = 3.0;

/// A closed set containing (or not) the origin, truncated to `B̄(0, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedClosedSet {
    base: DiscreteSet,
    truncation_radius: f64,
    contains_origin: bool,
}

impl TruncatedClosedSet {
    pub fn new(base: DiscreteSet, truncation_radius: f64, contains_origin: bool) -> Result<Self> {
        if !(truncation_radius > 0.0) || !truncation_radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "truncation radius must be > 0, got {truncation_radius}"
            )));
        }
        if let Some(p) = base.points().find(|p| norm(p) > truncation_radius) {
            return Err(Error::InvalidParameter(format!(
                "point at distance {} lies outside the truncation ball of radius {truncation_radius}",
                norm(p)
            )));
        }
        if contains_origin {
            let o = vec![0.0; base.dimension()];
            let d = base.nearest(&o).1;
            if d > base.resolution() {
                return Err(Error::InvalidParameter(format!(
                    "set claims to contain the origin but its nearest point is {d} away"
                )));
            }
        }
        Ok(Self { base, truncation_radius, contains_origin })
    }

    /// Truncates `set` to the ball and wraps it.
    pub fn from_set(set: &DiscreteSet, truncation_radius: f64, contains_origin: bool) -> Result<Self> {
        let base = set.truncate(truncation_radius).ok_or(Error::EmptySet)?;
        Self::new(base, truncation_radius, contains_origin)
    }

    pub fn base(&self) -> &DiscreteSet {
        &self.base
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn contains_origin(&self) -> bool {
        self.contains_origin
    }

    pub fn dimension(&self) -> usize {
        self.base.dimension()
    }
}

/// Strictly decreasing positive scales `r_0 > r_1 > … > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    scales: Vec<f64>,
    law: String,
}

impl ScaleSchedule {
    pub fn new(scales: Vec<f64>, law: impl Into<String>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::InvalidParameter("scale schedule must be nonempty".into()));
        }
        if scales.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter("scales must be positive and finite".into()));
        }
        if scales.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("scales must be strictly decreasing".into()));
        }
        Ok(Self { scales, law: law.into() })
    }

    /// `first · ratio^k` for `k = 0..count`.
    pub fn geometric(first: f64, ratio: f64, count: usize) -> Result<Self> {
        let scales = (0..count).map(|k| first * ratio.powi(k as i32)).collect();
        Self::new(scales, format!("geometric(first={first}, ratio={ratio})"))
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn law(&self) -> &str {
        &self.law
    }

    pub fn last(&self) -> f64 {
        *self.scales.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub scale: f64,
    pub basepoint: Point,
    pub discrepancy: f64,
    pub radius: f64,
}

/// Audit record of one tangent or pseudotangent check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceProfile {
    pub rows: Vec<ProfileRow>,
    pub verdict: bool,
    pub tolerance: f64,
}

impl ConvergenceProfile {
    fn from_rows(rows: Vec<ProfileRow>, tolerance: f64) -> Self {
        let verdict = rows.last().is_some_and(|r| r.discrepancy <= tolerance);
        Self { rows, verdict, tolerance }
    }

    pub fn final_discrepancy(&self) -> f64 {
        self.rows.last().map_or(f64::INFINITY, |r| r.discrepancy)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

/// `r⁻¹(K − x)` truncated to `B̄(0, R)`.
pub fn blowup(k: &DiscreteSet, x: &[f64], r: f64, radius: f64) -> Result<TruncatedClosedSet> {
    check_positive("scale", r)?;
    check_positive("radius", radius)?;
    let d = k.distance_to(x)?;
    if d > k.resolution() {
        return Err(Error::NotOnSet { distance: d, resolution: k.resolution() });
    }
    let scaled = translate_scale(k, x, r)?;
    let base = scaled.truncate(radius).ok_or(Error::EmptySet)?;
    TruncatedClosedSet::new(base, radius, true)
}

fn check_target(k_dim: usize, target: &TruncatedClosedSet) -> Result<()> {
    if target.dimension() != k_dim {
        return Err(Error::DimensionMismatch { expected: k_dim, found: target.dimension() });
    }
    if !target.contains_origin {
        return Err(Error::InvalidParameter("target must contain the origin".into()));
    }
    Ok(())
}

fn row(k: &DiscreteSet, x: &[f64], r: f64, target: &TruncatedClosedSet) -> Result<ProfileRow> {
    let radius = target.truncation_radius;
    let b = blowup(k, x, r, radius)?;
    Ok(ProfileRow {
        scale: r,
        basepoint: Point::from_slice(x),
        discrepancy: aw_discrepancy(b.base(), target.base(), radius)?,
        radius,
    })
}

/// Checks `T` as a tangent of `K` at `x` along the schedule.
pub fn approximates_tangent(
    k: &DiscreteSet,
    x: &[f64],
    schedule: &ScaleSchedule,
    target: &TruncatedClosedSet,
    tol: f64,
) -> Result<ConvergenceProfile> {
    let basepoints = vec![Point::new(x.to_vec())?; schedule.len()];
    pseudotangent_witness(k, x, &basepoints, schedule, target, tol)
}

/// Checks `T` as a pseudotangent of `K` at `x`: row `i` blows up at
/// `basepoints[i]` with scale `schedule[i]`.
pub fn pseudotangent_witness(
    k: &DiscreteSet,
    x: &[f64],
    basepoints: &[Point],
    schedule: &ScaleSchedule,
    target: &TruncatedClosedSet,
    tol: f64,
) -> Result<ConvergenceProfile> {
    check_positive("tolerance", tol)?;
    k.check_dim(x.len())?;
    check_target(k.dimension(), target)?;
    if basepoints.len() != schedule.len() {
        return Err(Error::InvalidParameter(format!(
            "{} basepoints for {} scales",
            basepoints.len(),
            schedule.len()
        )));
    }
    let min = k.resolution() / target.truncation_radius;
    if schedule.last() < min {
        return Err(Error::ScaleBelowResolution { scale: schedule.last(), min });
    }
    check_convergence(x, basepoints, 2.0 * k.resolution())?;
    let rows = basepoints
        .iter()
        .zip(schedule.scales())
        .map(|(p, &r)| {
            k.check_dim(p.dim())?;
            row(k, p.coords(), r, target)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceProfile::from_rows(rows, tol))
}

fn check_convergence(x: &[f64], basepoints: &[Point], slack: f64) -> Result<()> {
    let dists: Vec<f64> = basepoints.iter().map(|p| dist(p.coords(), x)).collect();
    for (i, w) in dists.windows(2).enumerate() {
        if w[1] > w[0] + slack {
            return Err(Error::NonConvergentBasepoints { row: i + 1 });
        }
    }
    Ok(())
}

/// True iff every `3ε`-connected component of `T` reaches the sphere of
/// radius `R − 3ε`, the finite trace of "all components are unbounded".
pub fn unbounded_components_check(t: &TruncatedClosedSet) -> bool {
    let base = &t.base;
    let slack = COMPONENT_SLACK * base.resolution();
    let n = base.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let tree = KdTree::new(base.dimension(), base.flat());
    let mut near = Vec::new();
    for i in 0..n {
        near.clear();
        tree.within(base.point(i), slack, &mut near);
        for &j in &near {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut reaches = vec![false; n];
    for i in 0..n {
        if norm(base.point(i)) >= t.truncation_radius - slack {
            let root = find(&mut parent, i);
            reaches[root] = true;
        }
    }
    (0..n).all(|i| {
        let root = find(&mut parent, i);
        reaches[root]
    })
}

/// Samples per unit of blown-up radius used when a curve is discretized for
/// a blowup.
pub const CURVE_SAMPLES_PER_RADIUS: f64 = 200.0;

/// Blowup of a curve: the curve is sampled inside `B̄(x, r·R)` at spacing
/// `r·R / 200`, which keeps the rescaled net at resolution `1/400` of `R`
/// whatever the scale.
pub fn curve_blowup(curve: &PolylineCurve, x: &[f64], r: f64, radius: f64) -> Result<TruncatedClosedSet> {
    check_positive("scale", r)?;
    check_positive("radius", radius)?;
    let net = curve_local_net(curve, x, r, radius)?;
    blowup(&net, x, r, radius)
}

fn curve_local_net(curve: &PolylineCurve, x: &[f64], r: f64, radius: f64) -> Result<DiscreteSet> {
    let step = r * radius / CURVE_SAMPLES_PER_RADIUS;
    let d = curve.distance_to(x)?;
    if d > step / 2.0 {
        return Err(Error::NotOnSet { distance: d, resolution: step / 2.0 });
    }
    curve.local_net(x, r * radius, step).ok_or(Error::EmptySet)
}

/// Tangent check on a curve, resampled at every scale.
pub fn curve_tangent_profile(
    curve: &PolylineCurve,
    x: &[f64],
    schedule: &ScaleSchedule,
    target: &TruncatedClosedSet,
    tol: f64,
) -> Result<ConvergenceProfile> {
    let basepoints = vec![Point::new(x.to_vec())?; schedule.len()];
    curve_pseudotangent_profile(curve, x, &basepoints, schedule, target, tol, 0.0)
}

/// Pseudotangent check on a curve; `slack` bounds how much the basepoint
/// distances to `x` may increase from one row to the next.
pub fn curve_pseudotangent_profile(
    curve: &PolylineCurve,
    x: &[f64],
    basepoints: &[Point],
    schedule: &ScaleSchedule,
    target: &TruncatedClosedSet,
    tol: f64,
    slack: f64,
) -> Result<ConvergenceProfile> {
    check_positive("tolerance", tol)?;
    check_target(curve.dimension(), target)?;
    if basepoints.len() != schedule.len() {
        return Err(Error::InvalidParameter(format!(
            "{} basepoints for {} scales",
            basepoints.len(),
            schedule.len()
        )));
    }
    check_convergence(x, basepoints, slack)?;
    let radius = target.truncation_radius;
    let rows = basepoints
        .iter()
        .zip(schedule.scales())
        .map(|(p, &r)| {
            let net = curve_local_net(curve, p.coords(), r, radius)?;
            row(&net, p.coords(), r, target)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceProfile::from_rows(rows, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{circle_net_focused, cross_net, line_net, segment_net};
    use crate::geom::excess;
    use std::f64::consts::PI;

    fn tcs(set: DiscreteSet, r: f64) -> TruncatedClosedSet {
        TruncatedClosedSet::from_set(&set, r, true).unwrap()
    }

    /// Unit circle about (1, 0): dense within ~0.0011 of the origin.
    fn circle() -> DiscreteSet {
        circle_net_focused(&[1.0, 0.0], 1.0, 2e-4, PI, 0.0011, 4e-7)
    }

    #[test]
    fn segment_blowup_at_endpoint() {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 1e-4);
        let b = blowup(&k, &[0.0, 0.0], 0.01, 1.0).unwrap();
        let want = segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01);
        assert!(aw_discrepancy(b.base(), &want, 1.0).unwrap() < 1e-9);
        assert!(b.contains_origin());
        assert!(b.base().points().any(|p| p == [0.0, 0.0]));
    }

    #[test]
    fn circle_blowup_is_vertical_line() {
        let k = circle();
        let b = blowup(&k, &[0.0, 0.0], 1e-3, 1.0).unwrap();
        let vertical = line_net(&[0.0, 1.0], 1.0, 2e-4);
        // analytic oracle: the arc deviates from its tangent by ≈ r·y²/2 ≤ 5e-4;
        // dedup keeps blown-up samples at most 2·(ε/100)/r apart
        let d = aw_discrepancy(b.base(), &vertical, 1.0).unwrap();
        let spacing = 2.0 * k.dedup_tolerance() / 1e-3;
        assert!(d <= 5e-4 + spacing / 2.0 + 1e-4, "{d}");
    }

    #[test]
    fn blowup_rejects_off_set_point() {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01);
        assert!(matches!(blowup(&k, &[0.5, 0.5], 0.1, 1.0), Err(Error::NotOnSet { .. })));
    }

    #[test]
    fn segment_tangent_is_ray() {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 1e-4);
        let s = ScaleSchedule::geometric(1.0, 0.5, 7).unwrap();
        let t = tcs(segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01), 1.0);
        let p = approximates_tangent(&k, &[0.0, 0.0], &s, &t, 0.02).unwrap();
        assert!(p.verdict);
        assert_eq!(p.rows.len(), 7);
        assert!(p.rows.iter().all(|r| r.discrepancy <= 0.02));
    }

    #[test]
    fn circle_tangent_verdicts() {
        let k = circle();
        let s = ScaleSchedule::new(vec![1e-1, 1e-2, 1e-3], "decade").unwrap();
        let vertical = tcs(line_net(&[0.0, 1.0], 1.0, 2e-3), 1.0);
        let horizontal = tcs(line_net(&[1.0, 0.0], 1.0, 2e-3), 1.0);
        let yes = approximates_tangent(&k, &[0.0, 0.0], &s, &vertical, 0.05).unwrap();
        assert!(yes.verdict, "{:?}", yes.rows);
        let no = approximates_tangent(&k, &[0.0, 0.0], &s, &horizontal, 0.05).unwrap();
        assert!(!no.verdict);
        assert!(no.final_discrepancy() > 0.9);
    }

    #[test]
    fn scale_guard() {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01);
        let s = ScaleSchedule::new(vec![0.1, 0.001], "x").unwrap();
        let t = tcs(segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01), 1.0);
        assert!(matches!(
            approximates_tangent(&k, &[0.0, 0.0], &s, &t, 0.1),
            Err(Error::ScaleBelowResolution { .. })
        ));
    }

    fn interior_run(target: &TruncatedClosedSet) -> ConvergenceProfile {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 1e-3);
        let n = 6;
        let basepoints: Vec<Point> =
            (1..=n).map(|i| Point::new(k.point(k.nearest(&[1.0 / i as f64, 0.0]).0).to_vec()).unwrap()).collect();
        let s = ScaleSchedule::new((1..=n).map(|i| 1.0 / (i * i) as f64).collect(), "1/i^2").unwrap();
        pseudotangent_witness(&k, &[0.0, 0.0], &basepoints, &s, target, 0.05).unwrap()
    }

    #[test]
    fn pseudotangent_interior_points_see_the_line() {
        let line = tcs(line_net(&[1.0, 0.0], 1.0, 0.01), 1.0);
        let p = interior_run(&line);
        assert!(p.verdict, "{:?}", p.rows);
        // first row blows up at (1, 0) at scale 1: only the left half is present
        assert!(p.rows[0].discrepancy >= 0.99);

        let ray = tcs(segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01), 1.0);
        let p = interior_run(&ray);
        assert!(!p.verdict);
        assert!(p.final_discrepancy() > 0.9);
    }

    #[test]
    fn constant_basepoints_match_tangent_profile() {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 1e-3);
        let s = ScaleSchedule::geometric(0.5, 0.5, 5).unwrap();
        let t = tcs(segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01), 1.0);
        let tan = approximates_tangent(&k, &[0.0, 0.0], &s, &t, 0.02).unwrap();
        let bps = vec![Point::from([0.0, 0.0]); 5];
        let psi = pseudotangent_witness(&k, &[0.0, 0.0], &bps, &s, &t, 0.02).unwrap();
        assert_eq!(tan, psi);
    }

    #[test]
    fn diverging_basepoints_rejected() {
        let k = segment_net(&[0.0, 0.0], &[1.0, 0.0], 1e-3);
        let s = ScaleSchedule::geometric(0.5, 0.5, 2).unwrap();
        let t = tcs(segment_net(&[0.0, 0.0], &[1.0, 0.0], 0.01), 1.0);
        let bps = vec![Point::from([0.1, 0.0]), Point::from([0.5, 0.0])];
        assert!(matches!(
            pseudotangent_witness(&k, &[0.0, 0.0], &bps, &s, &t, 0.1),
            Err(Error::NonConvergentBasepoints { row: 1 })
        ));
    }

    #[test]
    fn final_blowup_is_its_own_tangent() {
        let k = circle();
        let s = ScaleSchedule::new(vec![1e-1, 1e-2, 1e-3], "decade").unwrap();
        let t = blowup(&k, &[0.0, 0.0], 1e-3, 1.0).unwrap();
        let p = approximates_tangent(&k, &[0.0, 0.0], &s, &t, 1e-12).unwrap();
        assert!(p.verdict);
        assert_eq!(p.final_discrepancy(), 0.0);
    }

    #[test]
    fn blowup_commutes_with_truncated_rescale() {
        let k = circle();
        let b = blowup(&k, &[0.0, 0.0], 0.01, 1.0).unwrap();
        let manual = translate_scale(&k, &[0.0, 0.0], 0.01).unwrap().truncate(1.0).unwrap();
        assert_eq!(b.base(), &manual);
    }

    #[test]
    fn components() {
        let single = tcs(DiscreteSet::new(2, 0.01, vec![Point::from([0.0, 0.0])]).unwrap(), 1.0);
        assert!(!unbounded_components_check(&single));

        let cross = tcs(cross_net(2, 1.0, 0.01), 1.0);
        assert!(unbounded_components_check(&cross));

        let dot = DiscreteSet::new(2, 0.005, vec![Point::from([0.0, 0.5])]).unwrap();
        let line_dot = tcs(line_net(&[1.0, 0.0], 1.0, 0.01).union(&dot).unwrap(), 1.0);
        assert!(!unbounded_components_check(&line_dot));
    }

    #[test]
    fn truncated_set_validation() {
        let far = DiscreteSet::new(2, 0.01, vec![Point::from([2.0, 0.0])]).unwrap();
        assert!(TruncatedClosedSet::new(far, 1.0, false).is_err());
        let off = DiscreteSet::new(2, 0.01, vec![Point::from([0.5, 0.0])]).unwrap();
        assert!(TruncatedClosedSet::new(off.clone(), 1.0, true).is_err());
        assert!(TruncatedClosedSet::new(off, 1.0, false).is_ok());
        assert!(ScaleSchedule::new(vec![1.0, 1.0], "x").is_err());
        assert!(ScaleSchedule::new(vec![], "x").is_err());
        assert!(ScaleSchedule::new(vec![1.0, -1.0], "x").is_err());
    }

    #[test]
    fn blowup_contains_origin() {
        let k = cross_net(2, 3.0, 0.01);
        for (i, p) in k.points().enumerate().step_by(37) {
            let r = 0.05 + 0.01 * (i % 7) as f64;
            let b = blowup(&k, p, r, 1.0).unwrap();
            assert!(b.base().points().any(|q| q.iter().all(|c| *c == 0.0)));
            assert!(excess(b.base(), b.base()).unwrap() == 0.0);
        }
    }
}
