//! Great-circle arcs on spheres, sampled as polylines.

use std::f64::consts::PI;

use crate::geom::norm;

pub(crate) fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|c| c / n).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Angle step whose chord sagitta on a sphere of radius `radius` is at most
/// `chord_error`, capped at `max_step`.
pub(crate) fn angle_step(radius: f64, chord_error: f64, max_step: f64) -> f64 {
    let c = (1.0 - chord_error / radius).clamp(-1.0, 1.0);
    (2.0 * c.acos()).min(max_step).max(1e-6)
}

/// Points of the geodesic from `center + radius·u` to `center + radius·v`
/// (unit directions), excluding the start and ending exactly at `end` if
/// given. Antipodal pairs turn in the plane of `u` and the coordinate axis
/// of smallest index not parallel to `u`.
pub(crate) fn geodesic(center: &[f64], radius: f64, u: &[f64], v: &[f64], step: f64, end: Option<&[f64]>) -> Vec<Vec<f64>> {
    let c = dot(u, v).clamp(-1.0, 1.0);
    let theta = c.acos();
    let finish = |out: &mut Vec<Vec<f64>>| match end {
        Some(e) => out.push(e.to_vec()),
        None => out.push(center.iter().zip(v).map(|(z, w)| z + radius * w).collect()),
    };
    let mut out = Vec::new();
    if theta < 1e-12 {
        finish(&mut out);
        return out;
    }
    let w: Vec<f64> = if theta > PI - 1e-9 {
        let axis = (0..u.len()).find(|&i| u[i].abs() < 1.0 - 1e-9).expect("dimension ≥ 2");
        let mut e = vec![0.0; u.len()];
        e[axis] = 1.0;
        let p = dot(&e, u);
        unit(&e.iter().zip(u).map(|(x, y)| x - p * y).collect::<Vec<_>>())
    } else {
        unit(&v.iter().zip(u).map(|(x, y)| x - c * y).collect::<Vec<_>>())
    };
    let n = (theta / step).ceil().max(1.0) as usize;
    for k in 1..n {
        let phi = theta * k as f64 / n as f64;
        let (s, co) = phi.sin_cos();
        out.push(center.iter().zip(u).zip(&w).map(|((z, a), b)| z + radius * (a * co + b * s)).collect());
    }
    finish(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::dist;

    #[test]
    fn quarter_circle() {
        let pts = geodesic(&[0.0, 0.0], 2.0, &[1.0, 0.0], &[0.0, 1.0], PI / 8.0, None);
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!((norm(p) - 2.0).abs() < 1e-12);
        }
        assert!(dist(pts.last().unwrap(), &[0.0, 2.0]) < 1e-15);
    }

    #[test]
    fn antipodal_uses_lowest_axis() {
        let pts = geodesic(&[0.0, 0.0, 0.0], 1.0, &[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0], PI / 4.0, None);
        // turns through the x axis
        assert!(pts.iter().any(|p| (p[0] - 1.0).abs() < 1e-12));
        assert!(pts.iter().all(|p| p[1].abs() < 1e-12));
    }

    #[test]
    fn arc_length_within_half_pi_of_chord() {
        let u = [1.0, 0.0];
        for k in 1..12 {
            let th = PI * k as f64 / 12.0;
            let v = [th.cos(), th.sin()];
            let pts = geodesic(&[0.0, 0.0], 1.0, &u, &v, 0.01, None);
            let mut len = dist(&u, &pts[0]);
            for w in pts.windows(2) {
                len += dist(&w[0], &w[1]);
            }
            assert!(len <= PI / 2.0 * dist(&u, &v) + 1e-12);
        }
    }
}
