//! Sample nets used by tests, the CLI and the constructions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{dist, DiscreteSet, Point};

/// Points `start + dir·(i·step)` while short of `length`, then the far end.
fn ray_points(start: &[f64], dir: &[f64], length: f64, step: f64, out: &mut Vec<f64>) {
    let mut i = 0usize;
    loop {
        let t = i as f64 * step;
        if t >= length - step * 1e-9 {
            break;
        }
        out.extend(start.iter().zip(dir).map(|(s, u)| s + u * t));
        i += 1;
    }
    out.extend(start.iter().zip(dir).map(|(s, u)| s + u * length));
}

fn unit(a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let len = dist(a, b);
    (a.iter().zip(b).map(|(x, y)| (y - x) / len).collect(), len)
}

/// Net of the segment `[a, b]` at spacing ≤ `step`; resolution `step / 2`.
pub fn segment_net(a: &[f64], b: &[f64], step: f64) -> DiscreteSet {
    let (u, len) = unit(a, b);
    let mut out = Vec::new();
    ray_points(a, &u, len, step, &mut out);
    DiscreteSet::from_flat(a.len(), step / 2.0, out).expect("valid segment net")
}

/// Net of a polyline through `vertices`.
pub fn polyline_net(vertices: &[Point], step: f64) -> DiscreteSet {
    let d = vertices[0].dim();
    let mut out = Vec::new();
    for w in vertices.windows(2) {
        let (u, len) = unit(w[0].coords(), w[1].coords());
        ray_points(w[0].coords(), &u, len, step, &mut out);
    }
    DiscreteSet::from_flat(d, step / 2.0, out).expect("valid polyline net")
}

/// Net of a union of segments at spacing ≤ `step`; resolution `step / 2`.
pub fn segments_net(dim: usize, segments: &[(Point, Point)], step: f64) -> Result<DiscreteSet> {
    let mut out = Vec::new();
    for (a, b) in segments {
        if a.dim() != dim || b.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: a.dim().max(b.dim()) });
        }
        if a == b {
            out.extend_from_slice(a.coords());
            continue;
        }
        let (u, len) = unit(a.coords(), b.coords());
        ray_points(a.coords(), &u, len, step, &mut out);
    }
    DiscreteSet::from_flat(dim, step / 2.0, out)
}

/// Net of the line through the origin along `dir`, truncated to `[-r, r]`.
/// Points are placed symmetrically at `±i·step` so that the origin and both
/// ends are exact samples.
pub fn line_net(dir: &[f64], r: f64, step: f64) -> DiscreteSet {
    let n = norm_vec(dir);
    let u: Vec<f64> = dir.iter().map(|c| c / n).collect();
    let neg: Vec<f64> = u.iter().map(|c| -c).collect();
    let o = vec![0.0; dir.len()];
    let mut out = Vec::new();
    ray_points(&o, &u, r, step, &mut out);
    ray_points(&o, &neg, r, step, &mut out);
    DiscreteSet::from_flat(dir.len(), step / 2.0, out).expect("valid line net")
}

/// The axis cross `{x_0 = 0} ∪ {x_1 = 0}` in ℝᵈ, truncated at radius `r`.
pub fn cross_net(dim: usize, r: f64, step: f64) -> DiscreteSet {
    let mut e0 = vec![0.0; dim];
    e0[0] = 1.0;
    let mut e1 = vec![0.0; dim];
    e1[1] = 1.0;
    line_net(&e0, r, step).union(&line_net(&e1, r, step)).expect("same dimension")
}

fn norm_vec(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Planar circle sampled uniformly with arc spacing ≤ `step`.
pub fn circle_net(center: &[f64], radius: f64, step: f64) -> DiscreteSet {
    let n = ((2.0 * PI * radius) / step).ceil() as usize;
    let pts: Vec<f64> = (0..n)
        .flat_map(|i| {
            let th = 2.0 * PI * i as f64 / n as f64;
            [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
        })
        .collect();
    DiscreteSet::from_flat(2, step / 2.0, pts).expect("valid circle net")
}

/// Circle net with extra samples at spacing `fine` on the arc of half-angle
/// `half_width` about `focus_angle`. The recorded resolution is that of the
/// coarse sampling, which bounds the Hausdorff error everywhere.
pub fn circle_net_focused(
    center: &[f64],
    radius: f64,
    coarse: f64,
    focus_angle: f64,
    half_width: f64,
    fine: f64,
) -> DiscreteSet {
    let base = circle_net(center, radius, coarse);
    let m = ((2.0 * half_width * radius) / fine).ceil() as usize;
    let mut pts = Vec::with_capacity(2 * (m + 1));
    for i in 0..=m {
        let th = focus_angle - half_width + 2.0 * half_width * i as f64 / m as f64;
        pts.push(center[0] + radius * th.cos());
        pts.push(center[1] + radius * th.sin());
    }
    let mut all = base.flat().to_vec();
    all.extend(pts);
    DiscreteSet::from_flat(2, coarse / 2.0, all).expect("valid circle net")
}

/// Interval endpoints of the depth-`n` middle-thirds construction on
/// `[0,1] × {0}`, as exact multiples of `3^-n`. Resolution `3^-n / 2`.
pub fn cantor_net(depth: u32) -> DiscreteSet {
    let scale = 3u64.pow(depth);
    let mut intervals = vec![(0u64, scale)];
    for _ in 0..depth {
        intervals = intervals
            .into_iter()
            .flat_map(|(a, b)| {
                let third = (b - a) / 3;
                [(a, a + third), (b - third, b)]
            })
            .collect();
    }
    let s = scale as f64;
    let pts: Vec<f64> = intervals
        .into_iter()
        .flat_map(|(a, b)| [a as f64 / s, 0.0, b as f64 / s, 0.0])
        .collect();
    DiscreteSet::from_flat(2, 0.5 / s, pts).expect("valid cantor net")
}

/// `n` evenly spaced points on `[0,1] × {0}`, spacing `1/(n-1)`.
pub fn uniform_net(n: usize) -> DiscreteSet {
    let step = 1.0 / (n - 1) as f64;
    let pts: Vec<f64> = (0..n).flat_map(|i| [i as f64 * step, 0.0]).collect();
    DiscreteSet::from_flat(2, step / 2.0, pts).expect("valid uniform net")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_net_sizes() {
        for depth in 0..6 {
            assert_eq!(cantor_net(depth).len(), 2usize.pow(depth + 1));
        }
        let c = cantor_net(2);
        let xs: Vec<f64> = c.points().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 1.0 / 9.0, 2.0 / 9.0, 3.0 / 9.0, 6.0 / 9.0, 7.0 / 9.0, 8.0 / 9.0, 1.0]);
    }

    #[test]
    fn line_net_hits_origin_and_ends() {
        let l = line_net(&[0.0, 1.0], 1.0, 0.01);
        assert!(l.points().any(|p| p == [0.0, 0.0]));
        assert!(l.points().any(|p| p == [0.0, 1.0]));
        assert!(l.points().any(|p| p == [0.0, -1.0]));
    }
}
