//! Finite libraries of targets: closed sets through the origin whose
//! components all reach the truncation sphere.

use std::collections::HashSet;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fixtures::segments_net;
use crate::geom::{DiscreteSet, Point};
use crate::tangent::{unbounded_components_check, TruncatedClosedSet};

/// Net spacing of library targets, in units of `R`.
pub const TARGET_STEP: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub name: String,
    pub set: TruncatedClosedSet,
    /// Segments the set is drawn from; used to trace the target as a curve.
    pub segments: Vec<(Point, Point)>,
}

impl Target {
    /// Target drawn from segments and netted at `R·TARGET_STEP`.
    pub fn from_segments(name: impl Into<String>, dim: usize, radius: f64, segments: Vec<(Point, Point)>) -> Result<Self> {
        let net = segments_net(dim, &segments, radius * TARGET_STEP)?;
        let set = TruncatedClosedSet::from_set(&net, radius * (1.0 + 1e-12), true)?;
        Ok(Self { name: name.into(), set, segments })
    }

    pub fn segment_length(&self) -> f64 {
        self.segments.iter().map(|(a, b)| a.dist(b)).sum()
    }

    /// A segment starting at the origin, used as the descent direction.
    pub fn radial_ray(&self) -> Option<Vec<f64>> {
        self.segments.iter().find(|(a, _)| a.norm() == 0.0).map(|(_, b)| {
            let n = b.norm();
            b.coords().iter().map(|c| c / n).collect()
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetLibrary {
    dimension: usize,
    truncation_radius: f64,
    targets: Vec<Target>,
}

impl TargetLibrary {
    pub fn new(dimension: usize, truncation_radius: f64, targets: Vec<Target>) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::Library(format!("dimension must be ≥ 2, got {dimension}")));
        }
        if targets.is_empty() {
            return Err(Error::Library("library is empty".into()));
        }
        let mut names = HashSet::new();
        for t in &targets {
            if !names.insert(t.name.as_str()) {
                return Err(Error::Library(format!("duplicate target name '{}'", t.name)));
            }
            if t.set.dimension() != dimension {
                return Err(Error::Library(format!("target '{}' has dimension {}", t.name, t.set.dimension())));
            }
            if (t.set.truncation_radius() - truncation_radius).abs() > 1e-9 * truncation_radius {
                return Err(Error::Library(format!("target '{}' is truncated at another radius", t.name)));
            }
            if !t.set.contains_origin() {
                return Err(Error::Library(format!("target '{}' does not contain the origin", t.name)));
            }
            if !unbounded_components_check(&t.set) {
                return Err(Error::Library(format!("target '{}' has a component that misses the truncation sphere", t.name)));
            }
            if t.radial_ray().is_none() {
                return Err(Error::Library(format!("target '{}' has no ray from the origin", t.name)));
            }
            for (a, b) in &t.segments {
                let outer = a.norm().max(b.norm());
                if outer < truncation_radius * (1.0 - 1e-9) || outer > truncation_radius * (1.0 + 1e-9) {
                    return Err(Error::Library(format!("target '{}': every segment must end on the sphere", t.name)));
                }
            }
        }
        Ok(Self { dimension, truncation_radius, targets })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Target> {
        self.targets.iter().find(|t| t.name == name)
    }
}

fn planar(dim: usize, x: f64, y: f64) -> Point {
    let mut c = vec![0.0; dim];
    c[0] = x;
    c[1] = y;
    Point::new(c).expect("finite")
}

fn ray(dim: usize, r: f64, angle: f64) -> (Point, Point) {
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    let (s, c) = angle.sin_cos();
    (Point::origin(dim), planar(dim, r * snap(c), r * snap(s)))
}

fn line(dim: usize, r: f64, angle: f64) -> Vec<(Point, Point)> {
    vec![ray(dim, r, angle), ray(dim, r, angle + PI)]
}

/// The first `m` canonical targets in ℝᵈ truncated at `R`: horizontal and
/// vertical lines, the axis cross, the diagonal, a three-ray star, a line
/// with a parallel chord, a comb, then further lines.
pub fn target_library(dim: usize, radius: f64, m: usize) -> Result<TargetLibrary> {
    if m < 1 {
        return Err(Error::InvalidParameter("library needs m ≥ 1 targets".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be ≥ 2, got {dim}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")));
    }
    let r = radius;
    let h = 0.5 * 3f64.sqrt() * r;
    let mut shapes: Vec<(String, Vec<(Point, Point)>)> = vec![
        ("line-0".into(), line(dim, r, 0.0)),
        ("line-90".into(), line(dim, r, PI / 2.0)),
        ("cross".into(), [line(dim, r, 0.0), line(dim, r, PI / 2.0)].concat()),
        ("line-45".into(), line(dim, r, PI / 4.0)),
        ("star-3".into(), (0..3).map(|i| ray(dim, r, PI / 2.0 + 2.0 * PI * i as f64 / 3.0)).collect()),
        ("parallel-pair".into(), {
            let mut s = line(dim, r, 0.0);
            s.push((planar(dim, -h, 0.5 * r), planar(dim, h, 0.5 * r)));
            s
        }),
        ("comb".into(), {
            let mut s = line(dim, r, 0.0);
            s.push(ray(dim, r, PI / 2.0));
            for x0 in [-0.5 * r, 0.5 * r] {
                s.push((planar(dim, x0, 0.0), planar(dim, x0, h)));
            }
            s
        }),
    ];
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut e = 1usize;
    while shapes.len() < m {
        let deg = 180.0 * (e as f64 * golden).fract();
        shapes.push((format!("line-{deg:.4}"), line(dim, r, deg.to_radians())));
        e += 1;
    }
    shapes.truncate(m);
    let targets = shapes
        .into_iter()
        .map(|(name, segs)| Target::from_segments(name, dim, r, segs))
        .collect::<Result<Vec<_>>>()?;
    TargetLibrary::new(dim, r, targets)
}

/// Horizontal line plus an isolated point off the line: fails the
/// unbounded-components constraint, used to exercise library validation.
pub fn disqualified_candidate(dim: usize, radius: f64) -> Result<Target> {
    let segs = line(dim, radius, 0.0);
    let net = segments_net(dim, &segs, radius * TARGET_STEP)?;
    let dot = DiscreteSet::new(dim, net.resolution(), vec![planar(dim, 0.0, 0.5 * radius)])?;
    let set = TruncatedClosedSet::from_set(&net.union(&dot)?, radius * (1.0 + 1e-12), true)?;
    Ok(Target { name: "line-with-dot".into(), set, segments: segs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_target_is_horizontal_line() {
        let lib = target_library(2, 1.0, 1).unwrap();
        assert_eq!(lib.len(), 1);
        let t = &lib.targets()[0];
        assert!(t.set.base().points().all(|p| p[1] == 0.0));
        assert!(t.set.base().points().any(|p| p == [1.0, 0.0]));
        assert!(t.set.base().points().any(|p| p == [-1.0, 0.0]));
    }

    #[test]
    fn three_targets_include_cross() {
        let lib = target_library(2, 1.0, 3).unwrap();
        let cross = lib.get("cross").unwrap();
        assert!(unbounded_components_check(&cross.set));
    }

    #[test]
    fn many_targets_all_valid() {
        for d in [2, 3] {
            let lib = target_library(d, 2.0, 10).unwrap();
            assert_eq!(lib.len(), 10);
            for t in lib.targets() {
                assert!(t.set.contains_origin());
                assert!(unbounded_components_check(&t.set), "{}", t.name);
            }
        }
    }

    #[test]
    fn dot_candidate_rejected() {
        let mut targets = target_library(2, 1.0, 2).unwrap().targets().to_vec();
        targets.push(disqualified_candidate(2, 1.0).unwrap());
        assert!(matches!(TargetLibrary::new(2, 1.0, targets), Err(Error::Library(_))));
    }

    #[test]
    fn bounds() {
        assert!(target_library(2, 1.0, 0).is_err());
        assert!(target_library(1, 1.0, 1).is_err());
        let t = target_library(2, 1.0, 1).unwrap().targets()[0].clone();
        assert!(TargetLibrary::new(2, 1.0, vec![t.clone(), t]).is_err());
    }
}
