use thiserror::Error;

/// Every failure mode of the geometric pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("frame is not fanning (condition number {cond:.3e})")]
    NotFanning { cond: f64 },
    #[error("frame is not Lagrangian (|A^T Omega A| = {residual:.3e})")]
    NotLagrangian { residual: f64 },
    #[error("transformation is singular")]
    SingularTransform,
    #[error("metric is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("Newton iteration diverged at x = {x:?}, v = {v:?}")]
    NewtonDivergence { x: Vec<f64>, v: Vec<f64> },
    #[error("orbit left the chart domain at t = {0}")]
    OutOfChart(f64),
    #[error("t = {0} lies outside the transported window")]
    OutOfRange(f64),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("degenerate flag: u is parallel to v")]
    DegenerateFlag,
    #[error("base vector is not unit speed (F = {0})")]
    NotUnitSpeed(f64),
    #[error("basis is rank deficient")]
    RankDeficient,
    #[error("subspace is not coisotropic (residual {0:.3e})")]
    NotCoisotropic(f64),
    #[error("plane meets the symplectic complement (sigma_min = {0:.3e})")]
    TransversalityFailure(f64),
    #[error("Wronskian restricted to the intersection is degenerate (cond = {0:.3e})")]
    DegenerateRestriction(f64),
    #[error("vector is not horizontal (|F1(v) - F2(f_* v)| = {0:.3e})")]
    HorizontalityViolation(f64),
    #[error("smallness condition violated: {0}")]
    SmallnessViolation(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
