use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty point set")]
    EmptySet,

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need ≥ 2 points")]
    SingletonSet,

    #[error("point is {distance} from the set, farther than its resolution {resolution}")]
    NotOnSet { distance: f64, resolution: f64 },

    #[error("scale {scale} is below the sampling limit {min} (resolution / radius)")]
    ScaleBelowResolution { scale: f64, min: f64 },

    #[error("basepoints do not converge toward the limit point (row {row})")]
    NonConvergentBasepoints { row: usize },

    #[error("distinct points required")]
    CoincidentPoints,

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("no gap: no complementary interval satisfies the lambda bound at this resolution")]
    NoGap,

    #[error("no density-one parameter within the segment")]
    NoDensityPoint,

    #[error("sequence is not Cauchy at tolerance {tol}: final Hausdorff gap {gap}")]
    NonCauchy { gap: f64, tol: f64 },

    #[error("length semicontinuity violated: limit length {limit} exceeds tail minimum {tail_min} + {tol}")]
    Semicontinuity { limit: f64, tail_min: f64, tol: f64 },

    #[error("limit is a degenerate continuum (diameter {diameter} ≤ {tol})")]
    DegenerateLimit { diameter: f64, tol: f64 },

    #[error("fewer than two sites survive the disjointness selection")]
    TooFewSites,

    #[error("length budget infeasible: splice adds {needed}, budget {budget}")]
    BudgetInfeasible { needed: f64, budget: f64 },

    #[error("stage {stage}: length budget exhausted (needs {needed}, budget {budget})")]
    BudgetExhausted { stage: usize, needed: f64, budget: f64 },

    #[error("stage separation impossible: {0}")]
    StageSeparation(String),

    #[error("target library: {0}")]
    Library(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
