mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use lipcap_core::constructions::{
    build_h, example_cantor_stack, example_comb, nonuniqueness_probe, pipeline::select_ys, splice, target_library,
    pipeline::{theorem_pipeline_with, PipelineOptions}, TargetLibrary,
};
use lipcap_core::fixtures::{cantor_net, circle_net_focused, line_net};
use lipcap_core::io::{from_json, profile_csv, svg, to_json, CurveFile, Drawing, LibraryFile, SetFile};
use lipcap_core::{
    aw_discrepancy, base_capture, blowup, curve_limit, estimate_lambda, excess, CaptureCertificate, DiscreteSet,
    Error as CoreError, Point, ScaleSchedule, LAMBDA_SAFETY,
};

use output::{Io, RunManifest};

#[derive(Parser, Serialize)]
#[command(name = "lipcap", version, about = "Lipschitz captures with prescribed pseudotangents")]
struct Cli {
    /// Write a run manifest (command, paths, flags, status, wall time) here.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Estimate the uniform-disconnectedness constant of a set.
    Lambda {
        set: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rescale a set about a point and truncate it.
    Blowup {
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: Point,
        #[arg(long)]
        scale: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Attouch-Wets discrepancy and both excesses between two set files.
    Discrepancy {
        a: PathBuf,
        b: PathBuf,
        /// Defaults to the smaller truncation radius stored in the files.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spanning-tree capture of a set.
    Capture {
        set: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Build the curve H for a target library.
    BuildH {
        #[command(flatten)]
        library: LibraryArgs,
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[arg(long)]
        out: PathBuf,
        /// Check the tangent at the origin against every target; exit 1 on failure.
        #[arg(long)]
        certify: Option<f64>,
        /// Directory for one profile CSV per target (needs --certify).
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Splice copies of H into a capture near one point.
    Splice {
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: Point,
        /// Net points within this distance supply the gap witnesses.
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        delta: f64,
        /// Capture to modify; defaults to the spanning-tree capture.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        library: LibraryArgs,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out_curve: PathBuf,
        #[arg(long)]
        out_audit: PathBuf,
    },
    /// Run the stagewise construction and audit it.
    Pipeline {
        set: PathBuf,
        #[arg(long)]
        stages: usize,
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        library: LibraryArgs,
        #[arg(long, default_value_t = lipcap_core::constructions::pipeline::WITNESS_TOL)]
        tol: f64,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out_curve: PathBuf,
        #[arg(long)]
        out_audit: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Write example sets, curves and libraries.
    #[command(subcommand)]
    Examples(Example),
    /// Check a stored artifact.
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Subcommand, Serialize)]
enum Example {
    /// Cantor sets C_k on vertical segments {1/k} accumulating at the origin.
    CantorStack {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        kmax: u32,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stage `stages` of the recursive comb.
    Comb {
        #[arg(long)]
        stages: u32,
        #[arg(long)]
        teeth: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also run the two-scale probe at this many tooth tips.
        #[arg(long)]
        probe: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Middle-thirds Cantor net on [0,1]×{0}.
    Cantor {
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unit circle through the origin, densely sampled near it.
    Circle {
        #[arg(long, default_value_t = 5e-4)]
        step: f64,
        /// Spacing near the origin; must exceed step/200 to survive deduplication.
        #[arg(long, default_value_t = 3e-6)]
        fine_step: f64,
        /// Angular half-width of the densely sampled arc.
        #[arg(long, default_value_t = 1.1e-3)]
        window: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Line through the origin at an angle (degrees), truncated at a radius.
    Line {
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Store as a truncated set with this radius.
        #[arg(long)]
        truncate: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Default target library.
    Library {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        targets: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Serialize)]
enum Verify {
    /// Every net point lies within the set resolution of the curve.
    Capture {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        set: PathBuf,
    },
    /// A target is approximated by blowups of a set at a point along a schedule.
    Tangent {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: Point,
        #[arg(long)]
        target: PathBuf,
        /// Comma-separated scales, largest first.
        #[arg(long, value_delimiter = ',')]
        scales: Vec<f64>,
        #[arg(long)]
        tol: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// A sequence of curves (e.g. successive stages) has a nondegenerate limit.
    Limit {
        #[arg(required = true, num_args = 2..)]
        curves: Vec<PathBuf>,
        #[arg(long)]
        tol: f64,
    },
    /// Reading a file and writing it again gives identical bytes.
    Roundtrip {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: FileKind,
    },
}

#[derive(Clone, Copy, clap::ValueEnum, Serialize)]
enum FileKind {
    Set,
    Curve,
    Library,
}

#[derive(Args, Serialize)]
struct LibraryArgs {
    /// Library JSON; without it the default library is built.
    #[arg(long)]
    library: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    targets: usize,
    #[arg(long, default_value_t = 1.0)]
    truncation_radius: f64,
}

impl LibraryArgs {
    fn load(&self, io: &mut Io, dim: usize) -> Result<TargetLibrary> {
        Ok(match &self.library {
            Some(p) => from_json::<LibraryFile>(&io.read(p)?)?.to_library()?,
            None => target_library(dim, self.truncation_radius, self.targets)?,
        })
    }
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("bad coordinate {c:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Point::new(coords).map_err(|e| e.to_string())
}

/// A check ran and did not pass (exit 1).
#[derive(Debug)]
struct VerificationFailed(String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn failed(msg: impl Into<String>) -> anyhow::Error {
    VerificationFailed(msg.into()).into()
}

fn exit_status(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    match e.downcast_ref::<CoreError>() {
        Some(
            CoreError::NoGap
            | CoreError::NoDensityPoint
            | CoreError::NonCauchy { .. }
            | CoreError::Semicontinuity { .. }
            | CoreError::DegenerateLimit { .. }
            | CoreError::TooFewSites
            | CoreError::BudgetInfeasible { .. }
            | CoreError::BudgetExhausted { .. }
            | CoreError::StageSeparation(_),
        ) => 1,
        _ => 2,
    }
}

fn read_set(io: &mut Io, p: &Path) -> Result<DiscreteSet> {
    let f: SetFile = from_json(&io.read(p)?).with_context(|| format!("parsing {}", p.display()))?;
    f.to_set().with_context(|| format!("invalid set in {}", p.display()))
}

fn read_curve(io: &mut Io, p: &Path) -> Result<lipcap_core::PolylineCurve> {
    let f: CurveFile = from_json(&io.read(p)?).with_context(|| format!("parsing {}", p.display()))?;
    f.to_curve().with_context(|| format!("invalid curve in {}", p.display()))
}

fn write_json<T: Serialize>(io: &mut Io, p: &Path, v: &T) -> Result<()> {
    io.write(p, &to_json(v)?)
}

fn run(cmd: &Command, io: &mut Io) -> Result<()> {
    match cmd {
        Command::Lambda { set, out } => {
            let k = read_set(io, set)?;
            let rep = estimate_lambda(&k)?;
            println!("{}", rep.lambda_estimate);
            if let Some(o) = out {
                write_json(io, o, &rep)?;
            }
        }
        Command::Blowup { set, point, scale, radius, out, svg: svg_out } => {
            let k = read_set(io, set)?;
            if point.dim() != k.dimension() {
                return Err(CoreError::DimensionMismatch { expected: k.dimension(), found: point.dim() }.into());
            }
            let min = k.resolution() / radius;
            if *scale < min {
                return Err(CoreError::ScaleBelowResolution { scale: *scale, min }.into());
            }
            let b = blowup(&k, point.coords(), *scale, *radius)?;
            write_json(io, out, &SetFile::from_truncated(&b))?;
            if let Some(s) = svg_out {
                io.write(s, &svg("blowup", &[Drawing::Points(b.base())])?)?;
            }
            println!("{} points", b.base().len());
        }
        Command::Discrepancy { a, b, radius, out } => {
            let fa: SetFile = from_json(&io.read(a)?)?;
            let fb: SetFile = from_json(&io.read(b)?)?;
            let r = match (radius, fa.truncation_radius, fb.truncation_radius) {
                (Some(r), _, _) => *r,
                (None, Some(x), Some(y)) => x.min(y),
                (None, Some(x), None) | (None, None, Some(x)) => x,
                (None, None, None) => bail!(CoreError::InvalidParameter("--radius required for untruncated sets".into())),
            };
            let (sa, sb) = (fa.to_set()?, fb.to_set()?);
            let d = aw_discrepancy(&sa, &sb, r)?;
            let report = json!({
                "radius": r,
                "discrepancy": d,
                "excess_ab": excess(&sa, &sb)?,
                "excess_ba": excess(&sb, &sa)?,
            });
            println!("{d}");
            if let Some(o) = out {
                write_json(io, o, &report)?;
            }
        }
        Command::Capture { set, out, svg: svg_out } => {
            let k = read_set(io, set)?;
            let g = base_capture(&k)?;
            write_capture(io, out, &g, json!({ "kind": "spanning-tree capture" }))?;
            if let Some(s) = svg_out {
                io.write(s, &svg("capture", &[Drawing::Curve(&g.curve), Drawing::Points(&k)])?)?;
            }
            println!("length {} coverage {}", g.curve.arc_length(), g.coverage);
        }
        Command::BuildH { library, depth, out, certify, csv_dir, svg: svg_out } => {
            let lib = library.load(io, 2)?;
            let h = build_h(lib.dimension(), &lib, *depth)?;
            let length = h.curve.arc_length();
            let meta = json!({
                "depth": h.depth,
                "truncation_radius": h.truncation_radius,
                "arc_length": length,
                "budget": h.budget,
                "blocks": h.blocks,
                "targets": lib.targets().iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
            });
            write_json(io, out, &CurveFile::from_curve(&h.curve).with_metadata(meta))?;
            if let Some(s) = svg_out {
                io.write(s, &svg("H", &[Drawing::Curve(&h.curve)])?)?;
            }
            println!("length {length} budget {}", h.budget);
            if let Some(tol) = certify {
                let profiles = h.certify(&lib, *tol)?;
                if let Some(dir) = csv_dir {
                    std::fs::create_dir_all(dir)?;
                    for (t, p) in lib.targets().iter().zip(&profiles) {
                        io.write(&dir.join(format!("{}.csv", t.name)), &profile_csv(p))?;
                    }
                }
                let mut bad = Vec::new();
                for (t, p) in lib.targets().iter().zip(&profiles) {
                    println!("{} {} {}", t.name, p.final_discrepancy(), if p.verdict { "pass" } else { "FAIL" });
                    if !p.verdict {
                        bad.push(t.name.clone());
                    }
                }
                if length > h.budget {
                    bad.push("length budget".into());
                }
                if !bad.is_empty() {
                    return Err(failed(format!("H certificate failed: {}", bad.join(", "))));
                }
            }
        }
        Command::Splice { set, point, radius, delta, curve, library, lambda, out_curve, out_audit } => {
            let k = read_set(io, set)?;
            let lib = library.load(io, k.dimension())?;
            let g = match curve {
                Some(c) => CaptureCertificate::certify(read_curve(io, c)?, k.clone())?,
                None => base_capture(&k)?,
            };
            let lambda = match lambda {
                Some(l) => *l,
                None => estimate_lambda(&k)?.downstream_lambda(LAMBDA_SAFETY),
            };
            let m = lib.len() as u32;
            let h = build_h(k.dimension(), &lib, if m > 1 { 3 * (m - 1) } else { 1 })?;
            let ys = select_ys(&k, point.coords(), *radius);
            match splice(&g, &k, point.coords(), &ys, &h.curve, lambda, *delta) {
                Ok((f, records)) => {
                    let total: f64 = records.iter().map(|r| r.length_delta).sum();
                    write_capture(io, out_curve, &f, json!({ "kind": "splice" }))?;
                    write_json(
                        io,
                        out_audit,
                        &json!({ "status": "ok", "lambda": lambda, "ys": ys, "splices": records, "length_delta": total }),
                    )?;
                    println!("{} sites, length delta {total}", records.len());
                }
                Err(e) => {
                    write_json(io, out_audit, &json!({ "status": "failed", "lambda": lambda, "ys": ys, "error": e.to_string() }))?;
                    return Err(e.into());
                }
            }
        }
        Command::Pipeline { set, stages, delta, library, tol, lambda, out_curve, out_audit, svg: svg_out } => {
            let k = read_set(io, set)?;
            if *stages < 1 {
                bail!(CoreError::InvalidParameter("stages must be ≥ 1".into()));
            }
            if !(*delta > 0.0) {
                bail!(CoreError::InvalidParameter(format!("delta must be > 0, got {delta}")));
            }
            let lib = library.load(io, k.dimension())?;
            let opts = PipelineOptions { lambda: *lambda, witness_tol: *tol, ..PipelineOptions::default() };
            match theorem_pipeline_with(&k, *stages, *delta, &lib, &opts) {
                Ok((g, state)) => {
                    write_capture(io, out_curve, &g, json!({ "kind": "pipeline", "stages": stages }))?;
                    let status = if state.all_witnesses_pass() && state.budget_spent < *delta { "ok" } else { "failed" };
                    write_json(io, out_audit, &json!({ "status": status, "state": state }))?;
                    if let Some(s) = svg_out {
                        io.write(s, &svg("capture", &[Drawing::Curve(&g.curve), Drawing::Points(&k)])?)?;
                    }
                    for w in &state.witnesses {
                        println!(
                            "stage {} target {} discrepancy {} {}",
                            w.stage,
                            w.target,
                            w.profile.final_discrepancy(),
                            if w.verdict { "pass" } else { "FAIL" }
                        );
                    }
                    println!("length delta {} of budget {delta}", state.budget_spent);
                    if !state.all_witnesses_pass() {
                        return Err(failed("a pseudotangent witness failed"));
                    }
                    if state.budget_spent >= *delta {
                        return Err(failed(format!("length budget exceeded: {} ≥ {delta}", state.budget_spent)));
                    }
                }
                Err(e) => {
                    let stage = match &e {
                        CoreError::BudgetExhausted { stage, .. } => Some(*stage),
                        _ => None,
                    };
                    write_json(io, out_audit, &json!({ "status": "failed", "stage": stage, "error": e.to_string() }))?;
                    return Err(e.into());
                }
            }
        }
        Command::Examples(ex) => run_example(ex, io)?,
        Command::Verify(v) => run_verify(v, io)?,
    }
    Ok(())
}

fn write_capture(io: &mut Io, p: &Path, g: &CaptureCertificate, mut meta: serde_json::Value) -> Result<()> {
    meta["coverage"] = json!(g.coverage);
    meta["arc_length"] = json!(g.curve.arc_length());
    write_json(io, p, &CurveFile::from_curve(&g.curve).with_metadata(meta))
}

fn run_example(ex: &Example, io: &mut Io) -> Result<()> {
    match ex {
        Example::CantorStack { dim, kmax, depth, out } => {
            let (set, meta) = example_cantor_stack(*dim, *kmax, *depth)?;
            write_json(io, out, &SetFile::from_set(&set).with_metadata(serde_json::to_value(&meta)?))?;
            for p in &meta.pieces {
                println!("k={} dimension log({})/log({}) = {}", p.k, p.dimension_numerator_log, p.dimension_denominator_log, p.dimension);
            }
        }
        Example::Comb { stages, teeth, out, probe, svg: svg_out } => {
            let c = example_comb(*stages, *teeth)?;
            let mut meta = json!({
                "stages": stages,
                "teeth": teeth,
                "stage_lengths": c.stage_lengths,
                "length": c.length(),
            });
            if let Some(n) = probe {
                meta["probe"] = serde_json::to_value(nonuniqueness_probe(&c, *n)?)?;
            }
            write_json(io, out, &CurveFile::from_curve(&c.curve).with_metadata(meta))?;
            if let Some(s) = svg_out {
                io.write(s, &svg("comb", &[Drawing::Curve(&c.curve)])?)?;
            }
            println!("length {}", c.length());
        }
        Example::Cantor { depth, out } => {
            if *depth > 20 {
                bail!(CoreError::InvalidParameter(format!("depth {depth} > 20")));
            }
            write_json(io, out, &SetFile::from_set(&cantor_net(*depth)))?;
        }
        Example::Circle { step, fine_step, window, out } => {
            if !(*step <= 0.1 && *fine_step <= *step && *fine_step > step / 200.0 && *window > 0.0 && *window <= 1.0) {
                bail!(CoreError::InvalidParameter("need step/200 < fine-step ≤ step ≤ 0.1 and 0 < window ≤ 1".into()));
            }
            let set = circle_net_focused(&[1.0, 0.0], 1.0, *step, std::f64::consts::PI, *window, *fine_step);
            let meta = json!({ "center": [1.0, 0.0], "radius": 1.0, "focus": [0.0, 0.0] });
            write_json(io, out, &SetFile::from_set(&set).with_metadata(meta))?;
        }
        Example::Line { angle, radius, step, truncate, out } => {
            if !(*radius > 0.0 && *step > 0.0 && radius / step <= 1e7) {
                bail!(CoreError::InvalidParameter("need radius > 0, step > 0, radius/step ≤ 1e7".into()));
            }
            let th = angle.to_radians();
            let (c, s) = (th.cos(), th.sin());
            let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
            let set = line_net(&[snap(c), snap(s)], *radius, *step);
            let f = if *truncate {
                SetFile::from_truncated(&lipcap_core::TruncatedClosedSet::new(set, *radius, true)?)
            } else {
                SetFile::from_set(&set)
            };
            write_json(io, out, &f)?;
        }
        Example::Library { dim, targets, radius, out } => {
            write_json(io, out, &LibraryFile::from_library(&target_library(*dim, *radius, *targets)?))?;
        }
    }
    Ok(())
}

fn run_verify(v: &Verify, io: &mut Io) -> Result<()> {
    match v {
        Verify::Capture { curve, set } => {
            let c = read_curve(io, curve)?;
            let k = read_set(io, set)?;
            let g = CaptureCertificate::certify(c, k.clone())?;
            println!("coverage {} resolution {}", g.coverage, k.resolution());
            if g.coverage > k.resolution() {
                return Err(failed(format!("coverage {} exceeds resolution {}", g.coverage, k.resolution())));
            }
        }
        Verify::Tangent { set, point, target, scales, tol, csv } => {
            let k = read_set(io, set)?;
            let t = from_json::<SetFile>(&io.read(target)?)?.to_truncated(None)?;
            let schedule = ScaleSchedule::new(scales.clone(), "given")?;
            let p = lipcap_core::approximates_tangent(&k, point.coords(), &schedule, &t, *tol)?;
            if let Some(c) = csv {
                io.write(c, &profile_csv(&p))?;
            }
            println!("final discrepancy {}", p.final_discrepancy());
            if !p.verdict {
                return Err(failed(format!("final discrepancy {} > {tol}", p.final_discrepancy())));
            }
        }
        Verify::Limit { curves, tol } => {
            let cs = curves.iter().map(|c| read_curve(io, c)).collect::<Result<Vec<_>>>()?;
            let lim = curve_limit(&cs, *tol)?;
            println!("final gap {} tail from {}", lim.gaps.last().copied().unwrap_or(0.0), lim.tail_start);
        }
        Verify::Roundtrip { file, kind } => {
            let text = io.read(file)?;
            let again = match kind {
                FileKind::Set => {
                    let f: SetFile = from_json(&text)?;
                    let set = f.to_set()?;
                    let mut g = if f.truncation_radius.is_some() {
                        SetFile::from_truncated(&f.to_truncated(None)?)
                    } else {
                        SetFile::from_set(&set)
                    };
                    g.metadata = f.metadata.clone();
                    to_json(&g)?
                }
                FileKind::Curve => {
                    let f: CurveFile = from_json(&text)?;
                    to_json(&CurveFile { metadata: f.metadata.clone(), ..CurveFile::from_curve(&f.to_curve()?) })?
                }
                FileKind::Library => to_json(&LibraryFile::from_library(&from_json::<LibraryFile>(&text)?.to_library()?))?,
            };
            if again != text {
                return Err(failed("rewritten file differs"));
            }
            println!("identical");
        }
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Lambda { .. } => "lambda",
        Command::Blowup { .. } => "blowup",
        Command::Discrepancy { .. } => "discrepancy",
        Command::Capture { .. } => "capture",
        Command::BuildH { .. } => "build-h",
        Command::Splice { .. } => "splice",
        Command::Pipeline { .. } => "pipeline",
        Command::Examples(_) => "examples",
        Command::Verify(_) => "verify",
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TF_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CoreError::InvalidParameter(format!("TF_THREADS={v:?}")))?;
        if n == 0 {
            bail!(CoreError::InvalidParameter("TF_THREADS must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut io = Io::default();
    let result = init_threads().and_then(|()| run(&cli.command, &mut io));
    let status = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_status(e)
        }
    };
    if let Some(m) = &cli.manifest {
        let manifest = RunManifest {
            command: command_name(&cli.command),
            inputs: &io.inputs,
            parameters: serde_json::to_value(&cli.command).unwrap_or_default(),
            outputs: &io.outputs,
            exit_status: status,
            wall_time_seconds: start.elapsed().as_secs_f64(),
        };
        let written = to_json(&manifest).map_err(anyhow::Error::from).and_then(|s| Io::default().write(m, &s));
        if let Err(e) = written {
            eprintln!("error: manifest: {e:#}");
        }
    }
    ExitCode::from(status)
}
