//! Finite-resolution toolkit for Lipschitz curves that capture a compact set
//! while carrying prescribed pseudotangents at every point of it.
//!
//! Sets are handled as finite nets ([`DiscreteSet`]) with an explicit
//! resolution. Everything else (blowups, tangent profiles, splices, the
//! stagewise construction) is built on the metrics in [`geom`].

pub mod constructions;
pub mod curves;
pub mod disconnect;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod io;
mod kdtree;
pub mod tangent;

pub use curves::{
    base_capture, curve_limit, density_one_parameter, gap_interval, CaptureCertificate, GapInterval, PolylineCurve,
};
pub use disconnect::{estimate_lambda, DisconnectionReport, LAMBDA_SAFETY};
pub use error::{Error, Result};
pub use geom::{aw_discrepancy, excess, translate_scale, truncated_excess, DiscreteSet, Point};
pub use tangent::{
    approximates_tangent, blowup, pseudotangent_witness, unbounded_components_check, ConvergenceProfile,
    ScaleSchedule, TruncatedClosedSet,
};
