//! A finite-depth curve `H ⊂ [-1,1]ᵈ` through the origin whose blowups at
//! the origin reproduce each library target along its own scale subsequence.
//!
//! Level `ℓ` lives at radius `ρ_ℓ = 0.9·4^(-3ℓ)` and traces target
//! `T_(ℓ mod m)` scaled by `ρ_ℓ/R`, clipped away from the next level. Pieces
//! of a level are reached from a ring just outside `ρ_ℓ` (great-circle arcs
//! at radius `1.02ρ_ℓ`, invisible at the level's own scale); every piece
//! that dead-ends is retraced. A radial segment along a ray of the current
//! target descends to the next ring. After the innermost level the walk is
//! retraced to the outer ring and leaves through `+e₀`, so the endpoints are
//! `−e₀` and `+e₀` on the cube boundary.
//!
//! Consecutive levels sharing a target (only when `m = 1`) are merged into
//! one unclipped block.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::library::TargetLibrary;
use super::sphere::{geodesic, unit};
use crate::curves::{clip_to_ball, PolylineCurve};
use crate::error::{Error, Result};
use crate::geom::{dist, norm};
use crate::tangent::{curve_tangent_profile, ConvergenceProfile, ScaleSchedule};

/// Powers of 4 between consecutive levels.
pub const LEVEL_GAP: u32 = 3;
/// Radius of the outermost level.
pub const OUTER_RADIUS: f64 = 0.9;
/// Ring radius relative to its level.
pub const RING: f64 = 1.02;
/// Inner clip radius relative to the next level.
pub const INNER_CLIP: f64 = 1.1;
const RING_STEP: f64 = PI / 16.0;

/// Radius `0.9·4^(-k)` at exponent `k`.
pub fn level_radius(exponent: u32) -> f64 {
    OUTER_RADIUS * 0.25f64.powi(exponent as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HBlock {
    /// Library index of the traced target.
    pub target: usize,
    /// Exponents `k` whose scale `0.9·4^(-k)/R` sees this block.
    pub exponents: Vec<u32>,
    /// Outer radius `ρ`.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HCurve {
    pub curve: PolylineCurve,
    pub blocks: Vec<HBlock>,
    pub depth: u32,
    pub truncation_radius: f64,
    /// Declared length budget `2·Σ_ℓ ρ_ℓ·(2·len_max/R + C_conn) + 2(1 − 1.02ρ₀) + 1.02πρ₀`.
    pub budget: f64,
    pub connector_constant: f64,
    pub max_target_length: f64,
}

impl HCurve {
    /// Scales at which target `j` is visible, largest first.
    pub fn schedule(&self, target: usize) -> Result<ScaleSchedule> {
        let mut ks: Vec<u32> = self
            .blocks
            .iter()
            .filter(|b| b.target == target)
            .flat_map(|b| b.exponents.iter().copied())
            .collect();
        ks.sort_unstable();
        if ks.is_empty() {
            return Err(Error::InvalidParameter(format!("target {target} has no level in H")));
        }
        let scales = ks.iter().map(|&k| level_radius(k) / self.truncation_radius).collect();
        ScaleSchedule::new(scales, format!("0.9·4^-k/R for k in {ks:?}"))
    }

    /// Tangent profile of `H` at the origin against every library target.
    pub fn certify(&self, lib: &TargetLibrary, tol: f64) -> Result<Vec<ConvergenceProfile>> {
        let origin = vec![0.0; self.curve.dimension()];
        lib.targets()
            .iter()
            .enumerate()
            .map(|(j, t)| curve_tangent_profile(&self.curve, &origin, &self.schedule(j)?, &t.set, tol))
            .collect()
    }
}

/// Parts of `[a, b]` outside the open ball `B(0, r)`.
fn clip_outside(a: &[f64], b: &[f64], r: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let o = vec![0.0; a.len()];
    let at = |u: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + (y - x) * u).collect() };
    match clip_to_ball(a, b, &o, r) {
        None => vec![(a.to_vec(), b.to_vec())],
        Some((u0, u1)) => {
            let mut out = Vec::new();
            if u0 > 0.0 {
                out.push((a.to_vec(), at(u0)));
            }
            if u1 < 1.0 {
                out.push((at(u1), b.to_vec()));
            }
            out
        }
    }
}

struct Walk {
    dim: usize,
    verts: Vec<f64>,
}

impl Walk {
    fn push(&mut self, p: &[f64]) {
        let n = self.verts.len();
        if n >= self.dim {
            let last = &self.verts[n - self.dim..];
            // rounding leftovers from arcs between (nearly) equal directions
            if dist(last, p) <= 1e-12 * norm(p).max(norm(last)) {
                return;
            }
        }
        self.verts.extend_from_slice(p);
    }

    fn arc(&mut self, radius: f64, from: &[f64], to: &[f64]) {
        for p in geodesic(&vec![0.0; self.dim], radius, from, to, RING_STEP, None) {
            self.push(&p);
        }
    }

    fn len(&self) -> usize {
        self.verts.len() / self.dim
    }
}

/// Builds `H` for `lib` with levels at exponents `0, 3, 6, … ≤ depth`.
pub fn build_h(dim: usize, lib: &TargetLibrary, depth: u32) -> Result<HCurve> {
    if lib.dimension() != dim {
        return Err(Error::DimensionMismatch { expected: lib.dimension(), found: dim });
    }
    let m = lib.len();
    let levels = (depth / LEVEL_GAP) as usize + 1;
    if (depth as usize) < m || (m > 1 && levels < m) {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} too small to cover {m} targets (needs ≥ {})",
            if m > 1 { LEVEL_GAP as usize * (m - 1) } else { m }
        )));
    }
    let big_r = lib.truncation_radius();

    // group levels into blocks of equal target
    let mut blocks: Vec<HBlock> = Vec::new();
    for l in 0..levels {
        let k = LEVEL_GAP * l as u32;
        let target = l % m;
        match blocks.last_mut() {
            Some(b) if b.target == target => b.exponents.extend(k - LEVEL_GAP + 1..=k),
            _ => blocks.push(HBlock { target, exponents: vec![k], radius: level_radius(k) }),
        }
    }
    let last = blocks.last_mut().expect("≥ 1 level");
    let top = *last.exponents.last().expect("nonempty");
    last.exponents.extend(top + 1..=depth);

    let mut e0 = vec![0.0; dim];
    e0[0] = 1.0;
    let minus_e0: Vec<f64> = e0.iter().map(|c| -c).collect();
    let mut walk = Walk { dim, verts: Vec::new() };
    walk.push(&minus_e0);
    let ring0 = RING * blocks[0].radius;
    walk.push(&minus_e0.iter().map(|c| c * ring0).collect::<Vec<_>>());
    let entry_index = walk.len() - 1;
    let mut cur = minus_e0.clone();

    for (bi, block) in blocks.iter().enumerate() {
        let target = &lib.targets()[block.target];
        let rho = block.radius;
        let ring = RING * rho;
        let f = rho / big_r;
        let next = blocks.get(bi + 1).map(|b| b.radius);
        let mut pieces: Vec<(Vec<f64>, Vec<f64>, bool)> = Vec::new();
        for (a, b) in &target.segments {
            let a: Vec<f64> = a.coords().iter().map(|c| c * f).collect();
            let b: Vec<f64> = b.coords().iter().map(|c| c * f).collect();
            let parts = match next {
                Some(rn) => clip_outside(&a, &b, INNER_CLIP * rn),
                None => vec![(a, b)],
            };
            for (p, q) in parts {
                let np = norm(&p);
                let on = |n: f64| n >= rho * (1.0 - 1e-9);
                let (outer, inner) = if on(np) { (p, q) } else { (q, p) };
                if !on(norm(&outer)) {
                    return Err(Error::Library(format!("target '{}' has a piece off the sphere", target.name)));
                }
                let through = on(norm(&inner));
                pieces.push((outer, inner, through));
            }
        }
        let mut todo: Vec<usize> = (0..pieces.len()).collect();
        while !todo.is_empty() {
            // nearest piece along the ring
            let (pos, &pi) = todo
                .iter()
                .enumerate()
                .max_by(|x, y| {
                    let dx: f64 = unit(&pieces[*x.1].0).iter().zip(&cur).map(|(a, b)| a * b).sum();
                    let dy: f64 = unit(&pieces[*y.1].0).iter().zip(&cur).map(|(a, b)| a * b).sum();
                    dx.total_cmp(&dy).then(y.0.cmp(&x.0))
                })
                .expect("nonempty");
            todo.remove(pos);
            let (outer, inner, through) = &pieces[pi];
            let dir = unit(outer);
            walk.arc(ring, &cur, &dir);
            walk.push(outer);
            walk.push(inner);
            cur = if *through {
                unit(inner)
            } else {
                walk.push(outer);
                dir
            };
            walk.push(&cur.iter().map(|c| c * ring).collect::<Vec<_>>());
        }
        if let Some(rn) = next {
            let u = target.radial_ray().expect("validated library");
            walk.arc(ring, &cur, &u);
            walk.push(&u.iter().map(|c| c * RING * rn).collect::<Vec<_>>());
            cur = u;
        }
    }

    // retrace to the outer ring, cross to +e0 and leave
    let n = walk.len();
    for i in (entry_index..n - 1).rev() {
        let p = walk.verts[i * dim..(i + 1) * dim].to_vec();
        walk.push(&p);
    }
    walk.arc(ring0, &minus_e0, &e0);
    walk.push(&e0);

    let curve = PolylineCurve::from_flat(dim, walk.verts)?;

    let s_max = lib.targets().iter().map(|t| t.segments.len()).max().unwrap_or(0) as f64;
    let max_target_length = lib.targets().iter().map(|t| t.segment_length()).fold(0.0, f64::max);
    let connector_constant = (2.0 * s_max + 1.0) * RING * PI + 2.0 * s_max * 2.0 * (RING - 1.0) + RING;
    let per_level: f64 = (0..levels).map(|l| level_radius(LEVEL_GAP * l as u32)).sum::<f64>()
        * (2.0 * max_target_length / big_r + connector_constant);
    let budget = 2.0 * per_level + 2.0 * (1.0 - ring0) + ring0 * PI;
    Ok(HCurve {
        curve,
        blocks,
        depth,
        truncation_radius: big_r,
        budget,
        connector_constant,
        max_target_length,
    })
}

#[cfg(test)]
mod tests {
    use super::super::library::target_library;
    use super::*;

    #[test]
    fn single_line_all_scales() {
        let lib = target_library(2, 1.0, 1).unwrap();
        let h = build_h(2, &lib, 4).unwrap();
        let s = h.schedule(0).unwrap();
        assert_eq!(s.len(), 5);
        let p = &h.certify(&lib, 0.05).unwrap()[0];
        assert!(p.rows.iter().all(|r| r.discrepancy <= 0.05), "{:?}", p.rows);
    }

    #[test]
    fn three_targets_depth_six() {
        let lib = target_library(2, 1.0, 3).unwrap();
        let h = build_h(2, &lib, 6).unwrap();
        for p in h.certify(&lib, 0.05).unwrap() {
            assert!(p.verdict, "{:?}", p.rows);
        }
        assert!(h.curve.arc_length() <= h.budget);
    }

    #[test]
    fn endpoints_and_origin() {
        let lib = target_library(3, 1.0, 3).unwrap();
        let h = build_h(3, &lib, 6).unwrap();
        let c = &h.curve;
        assert_eq!(c.vertex(0), &[-1.0, 0.0, 0.0]);
        assert_eq!(c.vertex(c.vertex_count() - 1), &[1.0, 0.0, 0.0]);
        assert!(c.vertices().any(|v| v == [0.0, 0.0, 0.0]));
        assert!(c.vertices().all(|v| v.iter().all(|x| x.abs() <= 1.0)));
    }

    #[test]
    fn depth_guard() {
        let lib = target_library(2, 1.0, 3).unwrap();
        assert!(build_h(2, &lib, 2).is_err());
        assert!(build_h(2, &lib, 3).is_err());
        assert!(build_h(3, &lib, 6).is_err());
    }
}
