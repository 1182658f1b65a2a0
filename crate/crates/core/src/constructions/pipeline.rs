//! Stagewise capture: one splice per processed point, each confined to a
//! ball that avoids every earlier point.

use serde::{Deserialize, Serialize};

use super::hcurve::{build_h, level_radius, HCurve, LEVEL_GAP};
use super::library::TargetLibrary;
use super::splice::{apply_splice, plan_sites, SiteCandidate, SpliceRecord};
use crate::curves::{base_capture, curve_limit, length_semicontinuity, CaptureCertificate, PolylineCurve};
use crate::disconnect::{estimate_lambda, LAMBDA_SAFETY};
use crate::error::{Error, Result};
use crate::geom::{dist, DiscreteSet, Point};
use crate::tangent::{curve_pseudotangent_profile, ConvergenceProfile, ScaleSchedule};

/// Witness tolerance in units of the library radius.
pub const WITNESS_TOL: f64 = 0.08;
/// Tolerance of the length semicontinuity check.
pub const SEMICONTINUITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    /// Overrides `0.9 · estimate_lambda(K)`.
    pub lambda: Option<f64>,
    /// Depth passed to [`build_h`]; defaults to `3(m − 1)` (one level per target).
    pub h_depth: Option<u32>,
    pub witness_tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { lambda: None, h_depth: None, witness_tol: WITNESS_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub x: Point,
    pub radius: f64,
    pub ys: Vec<Point>,
    pub budget: f64,
    pub spent: f64,
    pub splices: Vec<SpliceRecord>,
    /// Sites dropped because their ball left `B(x, r)` or met an earlier ball.
    pub dropped_sites: usize,
    /// Sites dropped from the front to meet the stage budget.
    pub truncated_sites: usize,
    pub localized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub stage: usize,
    pub point: Point,
    pub target: String,
    pub verdict: bool,
    /// Same witness evaluated on the capture right after its own stage.
    pub verdict_at_stage: bool,
    pub profile: ConvergenceProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub stage: usize,
    pub lambda: f64,
    pub delta: f64,
    pub points: Vec<Point>,
    pub radii: Vec<f64>,
    pub budget_spent: f64,
    pub stages: Vec<StageRecord>,
    pub witnesses: Vec<WitnessRecord>,
    pub h_length: f64,
    pub base_length: f64,
    pub first_stage_length: f64,
    pub final_length: f64,
    pub cauchy_gaps: Vec<f64>,
    pub semicontinuity_tail: usize,
    /// Measured `lengthDelta / |x − yₙ|` range over all splices.
    pub c0_min: f64,
    pub c0_max: f64,
    pub idempotent: bool,
    /// Captures `G₀, G₁, …` (not serialized).
    #[serde(skip)]
    pub captures: Vec<PolylineCurve>,
}

impl PipelineState {
    pub fn all_witnesses_pass(&self) -> bool {
        self.witnesses.iter().all(|w| w.verdict)
    }
}

/// Farthest-point ordering of `count` net points starting at point 0.
pub fn farthest_point_order(k: &DiscreteSet, count: usize) -> Result<Vec<usize>> {
    if count > k.len() {
        return Err(Error::StageSeparation(format!("{count} stages but only {} distinct net points", k.len())));
    }
    let mut order = vec![0usize];
    let mut best: Vec<f64> = k.points().map(|p| dist(p, k.point(0))).collect();
    while order.len() < count {
        let (i, d) = best
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        if d <= 0.0 {
            return Err(Error::StageSeparation("duplicate stage points".into()));
        }
        order.push(i);
        for (j, p) in k.points().enumerate() {
            best[j] = best[j].min(dist(p, k.point(i)));
        }
    }
    Ok(order)
}

/// Net points in `B(x, r)` at distances decreasing by at least half, from
/// the farthest one in.
pub fn select_ys(k: &DiscreteSet, x: &[f64], r: f64) -> Vec<Point> {
    let mut cand: Vec<(f64, usize)> =
        k.points().enumerate().map(|(i, p)| (dist(p, x), i)).filter(|&(d, _)| d > 0.0 && d < r).collect();
    cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut out = Vec::new();
    let mut last = f64::INFINITY;
    for (d, i) in cand {
        // exact halves (1/27 vs 2/27) must survive rounding
        if d <= 0.5 * last * (1.0 + 1e-12) {
            out.push(Point::new(k.point(i).to_vec()).expect("finite"));
            last = d;
        }
    }
    out
}

fn localized(before: &PolylineCurve, after: &PolylineCurve, x: &[f64], r: f64) -> bool {
    let outside = |c: &PolylineCurve| -> Vec<Vec<f64>> { c.vertices().filter(|v| dist(v, x) >= r).map(<[f64]>::to_vec).collect() };
    outside(before) == outside(after)
}

/// Pseudotangent witnesses for the splices of one stage.
fn stage_witnesses(
    curve: &PolylineCurve,
    x: &[f64],
    radius: f64,
    splices: &[SpliceRecord],
    h: &HCurve,
    lib: &TargetLibrary,
    tol: f64,
) -> Result<Vec<ConvergenceProfile>> {
    let big_r = lib.truncation_radius();
    let mut order: Vec<&SpliceRecord> = splices.iter().collect();
    order.sort_by(|a, b| b.gap_witness.total_cmp(&a.gap_witness));
    let basepoints: Vec<Point> = order.iter().map(|s| s.site.clone()).collect();
    (0..lib.len())
        .map(|j| {
            let k = h
                .blocks
                .iter()
                .find(|b| b.target == j)
                .map(|b| b.exponents[0])
                .ok_or_else(|| Error::InvalidParameter(format!("H has no level for target {j}")))?;
            let rho = level_radius(k);
            let scales = order.iter().map(|s| s.copy_scale * rho / big_r).collect();
            let schedule = ScaleSchedule::new(scales, format!("copyScale·0.9·4^-{k}/R"))?;
            curve_pseudotangent_profile(curve, x, &basepoints, &schedule, &lib.targets()[j].set, tol, radius)
        })
        .collect()
}

pub fn theorem_pipeline(
    k: &DiscreteSet,
    stages: usize,
    delta: f64,
    lib: &TargetLibrary,
) -> Result<(CaptureCertificate, PipelineState)> {
    theorem_pipeline_with(k, stages, delta, lib, &PipelineOptions::default())
}

pub fn theorem_pipeline_with(
    k: &DiscreteSet,
    stages: usize,
    delta: f64,
    lib: &TargetLibrary,
    opts: &PipelineOptions,
) -> Result<(CaptureCertificate, PipelineState)> {
    if stages < 1 {
        return Err(Error::InvalidParameter("stages must be ≥ 1".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    if lib.dimension() != k.dimension() {
        return Err(Error::DimensionMismatch { expected: k.dimension(), found: lib.dimension() });
    }
    let lambda = match opts.lambda {
        Some(l) => l,
        None => estimate_lambda(k)?.downstream_lambda(LAMBDA_SAFETY),
    };
    let m = lib.len() as u32;
    let depth = opts.h_depth.unwrap_or(if m > 1 { LEVEL_GAP * (m - 1) } else { 1 });
    let h = build_h(k.dimension(), lib, depth)?;

    let g0 = base_capture(k)?;
    let order = farthest_point_order(k, stages)?;
    let xs: Vec<Point> = order.iter().map(|&i| Point::new(k.point(i).to_vec()).expect("finite")).collect();

    let mut g = g0.clone();
    let mut captures = vec![g0.curve.clone()];
    let mut records: Vec<StageRecord> = Vec::new();
    let mut radii = Vec::new();
    let mut balls: Vec<(Point, f64)> = Vec::new();
    let mut spent = 0.0;
    let mut stage_profiles: Vec<Vec<ConvergenceProfile>> = Vec::new();

    for n in 0..stages {
        let stage = n + 1;
        let x = xs[n].coords();
        let r = if n == 0 {
            if stages == 1 {
                0.25 * k.points().map(|p| dist(p, x)).fold(0.0, f64::max)
            } else {
                0.25 * xs[1..].iter().map(|p| dist(p.coords(), x)).fold(f64::INFINITY, f64::min)
            }
        } else {
            0.25 * xs[..n].iter().map(|p| dist(p.coords(), x)).fold(f64::INFINITY, f64::min)
        };
        if !(r > 0.0) {
            return Err(Error::StageSeparation(format!("stage {stage}: zero radius")));
        }
        radii.push(r);
        let ys = select_ys(k, x, r);
        if ys.is_empty() {
            return Err(Error::StageSeparation(format!("stage {stage}: no net points inside B(x, r)")));
        }
        let plan = plan_sites(&g, k, x, &ys, lambda)?;
        let mut kept: Vec<SiteCandidate> = Vec::new();
        for s in plan.iter() {
            let inside = dist(s.site.coords(), x) + s.ball_radius < r;
            let free = balls.iter().all(|(c, b)| c.dist(&s.site) > b + s.ball_radius)
                && kept.iter().all(|o| o.site.dist(&s.site) > o.ball_radius + s.ball_radius);
            if inside && free {
                kept.push(s.clone());
            }
        }
        let dropped_sites = plan.len() - kept.len();
        if kept.is_empty() {
            return Err(Error::TooFewSites);
        }
        let budget = delta * 0.5f64.powi(stage as i32);
        let mut truncated = 0;
        let (next, splices) = loop {
            let (f, recs) = apply_splice(&g, k, &kept[truncated..], &h.curve)?;
            let needed: f64 = recs.iter().map(|s| s.length_delta).sum();
            if needed < budget {
                break (f, recs);
            }
            truncated += 1;
            if truncated == kept.len() {
                return Err(Error::BudgetExhausted { stage, needed, budget });
            }
        };
        let stage_spent = next.curve.arc_length() - g.curve.arc_length();
        spent += stage_spent;
        let loc = localized(&g.curve, &next.curve, x, r);
        for s in &splices {
            balls.push((s.site.clone(), s.ball_radius));
        }
        stage_profiles.push(stage_witnesses(&next.curve, x, r, &splices, &h, lib, opts.witness_tol * lib.truncation_radius())?);
        records.push(StageRecord {
            stage,
            x: xs[n].clone(),
            radius: r,
            ys,
            budget,
            spent: stage_spent,
            splices,
            dropped_sites,
            truncated_sites: truncated,
            localized: loc,
        });
        g = next;
        captures.push(g.curve.clone());
    }

    let tol = opts.witness_tol * lib.truncation_radius();
    let mut witnesses = Vec::new();
    let mut idempotent = true;
    for (rec, at_stage) in records.iter().zip(&stage_profiles) {
        let finals = stage_witnesses(&g.curve, rec.x.coords(), rec.radius, &rec.splices, &h, lib, tol)?;
        for ((t, p), q) in lib.targets().iter().zip(finals).zip(at_stage) {
            idempotent &= p == *q;
            witnesses.push(WitnessRecord {
                stage: rec.stage,
                point: rec.x.clone(),
                target: t.name.clone(),
                verdict: p.verdict,
                verdict_at_stage: q.verdict,
                profile: p,
            });
        }
    }

    let cauchy_tol = radii.iter().copied().fold(0.0, f64::max);
    let limit = curve_limit(&captures, cauchy_tol)?;
    let semicontinuity_tail = length_semicontinuity(&captures, &limit.gaps, SEMICONTINUITY_TOL)?;

    let ratios: Vec<f64> =
        records.iter().flat_map(|r| r.splices.iter().map(|s| s.length_delta / s.gap_witness)).collect();
    let state = PipelineState {
        stage: stages,
        lambda,
        delta,
        points: xs,
        radii,
        budget_spent: spent,
        stages: records,
        witnesses,
        h_length: h.curve.arc_length(),
        base_length: captures[0].arc_length(),
        first_stage_length: captures[1].arc_length(),
        final_length: g.curve.arc_length(),
        cauchy_gaps: limit.gaps,
        semicontinuity_tail,
        c0_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        c0_max: ratios.iter().copied().fold(0.0, f64::max),
        idempotent,
        captures,
    };
    Ok((g, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::target_library;
    use crate::fixtures::cantor_net;

    #[test]
    fn farthest_points_on_cantor() {
        let k = cantor_net(3);
        let o = farthest_point_order(&k, 3).unwrap();
        assert_eq!(k.point(o[0]), &[0.0, 0.0]);
        assert_eq!(k.point(o[1]), &[1.0, 0.0]);
        // 1/3 and 2/3 tie in exact arithmetic; rounding picks one of them
        let third = k.point(o[2])[0];
        assert!((third - 1.0 / 3.0).abs() < 1e-15 || (third - 2.0 / 3.0).abs() < 1e-15);
        assert!(farthest_point_order(&k, 17).is_err());
    }

    #[test]
    fn ys_halve() {
        let k = cantor_net(3);
        let ys = select_ys(&k, &[1.0, 0.0], 0.25);
        let d: Vec<f64> = ys.iter().map(|y| 1.0 - y.coords()[0]).collect();
        assert_eq!(d.len(), 3);
        for w in d.windows(2) {
            assert!(w[1] <= 0.5 * w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn single_stage() {
        let k = cantor_net(3);
        let lib = target_library(2, 1.0, 3).unwrap();
        let (g, st) = theorem_pipeline(&k, 1, 0.5, &lib).unwrap();
        assert_eq!(st.stages.len(), 1);
        assert!(st.stages[0].localized);
        assert!(g.coverage <= k.resolution());
        assert!(st.all_witnesses_pass());
    }

    #[test]
    fn guards() {
        let k = cantor_net(3);
        let lib = target_library(2, 1.0, 3).unwrap();
        assert!(theorem_pipeline(&k, 0, 0.5, &lib).is_err());
        assert!(matches!(theorem_pipeline(&k, 3, 1e-9, &lib), Err(Error::BudgetExhausted { stage: 1, .. })));
    }
}
