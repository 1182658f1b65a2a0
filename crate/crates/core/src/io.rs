//! File formats: JSON for sets, curves and libraries, CSV for profiles, and a
//! minimal SVG rendering.
//!
//! JSON floats use the shortest decimal that round-trips, so a value written
//! and read back is bit-identical.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::constructions::{Target, TargetLibrary};
use crate::curves::PolylineCurve;
use crate::error::{Error, Result};
use crate::geom::{DiscreteSet, Point};
use crate::tangent::{ConvergenceProfile, TruncatedClosedSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetFile {
    pub dimension: usize,
    pub resolution: f64,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains_origin: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

impl SetFile {
    pub fn from_set(set: &DiscreteSet) -> Self {
        Self {
            dimension: set.dimension(),
            resolution: set.resolution(),
            points: set.points().map(<[f64]>::to_vec).collect(),
            truncation_radius: None,
            contains_origin: None,
            metadata: None,
        }
    }

    pub fn from_truncated(t: &TruncatedClosedSet) -> Self {
        Self {
            truncation_radius: Some(t.truncation_radius()),
            contains_origin: Some(t.contains_origin()),
            ..Self::from_set(t.base())
        }
    }

    pub fn with_metadata(mut self, meta: Value) -> Self {
        self.metadata = Some(meta);
        self
    }

    pub fn to_set(&self) -> Result<DiscreteSet> {
        if self.points.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(p) = self.points.iter().find(|p| p.len() != self.dimension) {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: p.len() });
        }
        DiscreteSet::from_flat(self.dimension, self.resolution, self.points.concat())
    }

    /// The set as a truncated closed set; plain sets need `radius`.
    pub fn to_truncated(&self, radius: Option<f64>) -> Result<TruncatedClosedSet> {
        let r = radius
            .or(self.truncation_radius)
            .ok_or_else(|| Error::InvalidParameter("no truncation radius given".into()))?;
        let origin = vec![0.0; self.dimension];
        let set = self.to_set()?;
        let contains = self.contains_origin.unwrap_or_else(|| set.nearest(&origin).1 <= set.resolution());
        if self.truncation_radius == Some(r) {
            TruncatedClosedSet::new(set, r, contains)
        } else {
            TruncatedClosedSet::from_set(&set, r, contains)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub dimension: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

impl CurveFile {
    pub fn from_curve(c: &PolylineCurve) -> Self {
        Self { dimension: c.dimension(), vertices: c.vertices().map(<[f64]>::to_vec).collect(), metadata: None }
    }

    pub fn with_metadata(mut self, meta: Value) -> Self {
        self.metadata = Some(meta);
        self
    }

    pub fn to_curve(&self) -> Result<PolylineCurve> {
        if self.dimension < 1 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        if let Some(p) = self.vertices.iter().find(|p| p.len() != self.dimension) {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: p.len() });
        }
        PolylineCurve::from_flat(self.dimension, self.vertices.concat())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetFile {
    pub name: String,
    pub segments: Vec<[Vec<f64>; 2]>,
}

/// Library JSON: targets are stored by their segments and re-netted on read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LibraryFile {
    pub dimension: usize,
    pub truncation_radius: f64,
    pub targets: Vec<TargetFile>,
}

impl LibraryFile {
    pub fn from_library(lib: &TargetLibrary) -> Self {
        Self {
            dimension: lib.dimension(),
            truncation_radius: lib.truncation_radius(),
            targets: lib
                .targets()
                .iter()
                .map(|t| TargetFile {
                    name: t.name.clone(),
                    segments: t.segments.iter().map(|(a, b)| [a.coords().to_vec(), b.coords().to_vec()]).collect(),
                })
                .collect(),
        }
    }

    pub fn to_library(&self) -> Result<TargetLibrary> {
        let targets = self
            .targets
            .iter()
            .map(|t| {
                let segs = t
                    .segments
                    .iter()
                    .map(|[a, b]| Ok((Point::new(a.clone())?, Point::new(b.clone())?)))
                    .collect::<Result<Vec<_>>>()?;
                Target::from_segments(t.name.clone(), self.dimension, self.truncation_radius, segs)
            })
            .collect::<Result<Vec<_>>>()?;
        TargetLibrary::new(self.dimension, self.truncation_radius, targets)
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

/// Profile CSV with header `scale,basepoint,discrepancy,radius`; the basepoint
/// coordinates are joined with `;`.
pub fn profile_csv(p: &ConvergenceProfile) -> String {
    let mut out = String::from("scale,basepoint,discrepancy,radius\n");
    for r in &p.rows {
        let bp: Vec<String> = r.basepoint.coords().iter().map(f64::to_string).collect();
        let _ = writeln!(out, "{},{},{},{}", r.scale, bp.join(";"), r.discrepancy, r.radius);
    }
    out
}

/// Either a point set or a curve to draw.
pub enum Drawing<'a> {
    Points(&'a DiscreteSet),
    Curve(&'a PolylineCurve),
}

/// Minimal SVG of a 2-D set or curve; higher dimensions are projected to the
/// first two coordinates and the title says so.
pub fn svg(title: &str, items: &[Drawing<'_>]) -> Result<String> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut dim = 0;
    for it in items {
        let (d, v): (usize, Vec<&[f64]>) = match it {
            Drawing::Points(s) => (s.dimension(), s.points().collect()),
            Drawing::Curve(c) => (c.dimension(), c.vertices().collect()),
        };
        if d < 2 {
            return Err(Error::InvalidParameter("SVG needs dimension ≥ 2".into()));
        }
        dim = dim.max(d);
        pts.extend(v.iter().map(|p| (p[0], p[1])));
    }
    if pts.is_empty() {
        return Err(Error::EmptySet);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-300);
    let size = 800.0;
    let pad = 20.0;
    let k = (size - 2.0 * pad) / span;
    let map = |x: f64, y: f64| (pad + (x - x0) * k, size - pad - (y - y0) * k);
    let mut title = title.to_string();
    if dim > 2 {
        title.push_str(&format!(" (projected from dimension {dim} to the first two coordinates)"));
    }
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(out, "<title>{}</title>", escape(&title));
    for it in items {
        match it {
            Drawing::Points(s) => {
                let _ = writeln!(out, r#"<g fill="black">"#);
                for p in s.points() {
                    let (x, y) = map(p[0], p[1]);
                    let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.5"/>"#);
                }
                let _ = writeln!(out, "</g>");
            }
            Drawing::Curve(c) => {
                let path: Vec<String> = c
                    .vertices()
                    .map(|p| {
                        let (x, y) = map(p[0], p[1]);
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points="{}"/>"#,
                    path.join(" ")
                );
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::target_library;
    use crate::fixtures::cantor_net;

    #[test]
    fn set_roundtrip_bit_exact() {
        let k = cantor_net(3);
        let s = to_json(&SetFile::from_set(&k)).unwrap();
        let back = from_json::<SetFile>(&s).unwrap().to_set().unwrap();
        assert_eq!(back, k);
        assert_eq!(to_json(&SetFile::from_set(&back)).unwrap(), s);
    }

    #[test]
    fn awkward_floats_roundtrip() {
        let v = vec![vec![0.1 + 0.2, 1.0 / 3.0], vec![f64::MIN_POSITIVE, 2.0f64.sqrt() * 1e-300]];
        let f = CurveFile { dimension: 2, vertices: v.clone(), metadata: None };
        let back: CurveFile = from_json(&to_json(&f).unwrap()).unwrap();
        assert_eq!(back.vertices, v);
    }

    #[test]
    fn library_roundtrip() {
        let lib = target_library(2, 1.0, 3).unwrap();
        let f = LibraryFile::from_library(&lib);
        assert_eq!(f.to_library().unwrap(), lib);
    }

    #[test]
    fn readers_reject_bad_sets() {
        for bad in [
            r#"{"dimension":0,"resolution":1,"points":[[]]}"#,
            r#"{"dimension":1,"resolution":0,"points":[[1]]}"#,
            r#"{"dimension":1,"resolution":1,"points":[]}"#,
            r#"{"dimension":2,"resolution":1,"points":[[1]]}"#,
        ] {
            assert!(from_json::<SetFile>(bad).unwrap().to_set().is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let p = ConvergenceProfile {
            rows: vec![crate::tangent::ProfileRow {
                scale: 0.5,
                basepoint: Point::from([1.0, -2.0]),
                discrepancy: 0.25,
                radius: 1.0,
            }],
            verdict: true,
            tolerance: 0.1,
        };
        assert_eq!(profile_csv(&p), "scale,basepoint,discrepancy,radius\n0.5,1;-2,0.25,1\n");
    }

    #[test]
    fn svg_flags_projection() {
        let k = DiscreteSet::new(3, 0.1, vec![Point::from([0.0, 0.0, 1.0]), Point::from([1.0, 1.0, 0.0])]).unwrap();
        let s = svg("set", &[Drawing::Points(&k)]).unwrap();
        assert!(s.contains("projected from dimension 3"));
        assert_eq!(s.matches("<circle").count(), 2);
    }
}
