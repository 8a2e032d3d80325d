use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("singular metric (|det| = {det:e}, threshold {threshold:e})")]
    SingularMetric { det: f64, threshold: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("elements belong to different algebras")]
    ParamMismatch,
    #[error("element is not purely imaginary")]
    NotImaginary,
    #[error("element has null norm")]
    NullNorm,
    #[error("not radiant (defect {defect:e})")]
    NotRadiant { defect: f64 },
    #[error("not conelike (residual {residual:e})")]
    NotConelike { residual: f64 },
    #[error("rho does not vanish (defect {defect:e})")]
    RhoNonzero { defect: f64 },
    #[error("dimension {dim} too small")]
    DimensionTooSmall { dim: usize },
    #[error("null direction: k(t,t) = {value:e}")]
    NullDirection { value: f64 },
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("not an AH structure (defect {defect:e})")]
    NotAH { defect: f64 },
    #[error("not statistical (defect {defect:e})")]
    NotStatistical { defect: f64 },
    #[error("two-form not closed (defect {defect:e})")]
    NotClosed { defect: f64 },
    #[error("Q incompatible with omega (defect {defect:e})")]
    IncompatibleQ { defect: f64 },
    #[error("connection not invariant along the vertical field (defect {defect:e})")]
    NotInvariant { defect: f64 },
    #[error("t = -1 makes the lifted metric degenerate")]
    DegenerateT,
    #[error("degree k = n + 1 is not allowed")]
    ForbiddenDegree,
    #[error("eta does not vanish (defect {defect:e})")]
    NotThomas { defect: f64 },
    #[error("bad chart parameters: {0}")]
    BadParams(String),
    #[error("domain violation: {reason}")]
    DomainViolation { reason: String, t: f64, x: Vec<f64>, v: Vec<f64> },
    #[error("no vector field attached to the chart")]
    MissingField,
    #[error("divergence vanishes at the point")]
    VanishingDivergence,
    #[error("derivative vanishes at t = {t}")]
    CriticalPoint { t: f64 },
    #[error("curve is not a geodesic path (defect {defect:e})")]
    NotAGeodesicPath { defect: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}
