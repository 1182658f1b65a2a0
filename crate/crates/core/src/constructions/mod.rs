//! Builders: target libraries, the curve `H`, splices, the stagewise
//! capture, and the example sets.

pub mod examples;
pub mod hcurve;
pub mod library;
pub mod pipeline;
pub mod splice;
mod sphere;

pub use examples::{example_cantor_stack, example_comb, nonuniqueness_probe, Comb, CantorStackMeta};
pub use hcurve::{build_h, HCurve};
pub use library::{target_library, Target, TargetLibrary};
pub use splice::{select_disjoint_subsequence, splice, SpliceRecord};
pub use pipeline::{theorem_pipeline, PipelineState};
