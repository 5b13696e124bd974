use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular Strauss curve: pq = 1")]
    SingularCurve,
    #[error("no admissible reduced exponent: {0}")]
    ReductionInfeasible(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("metric is not Lorentzian at r = {r}, t = {t}")]
    NotLorentzian { r: f64, t: f64 },
    #[error("CFL violated: cfl {cfl} exceeds limit {limit}")]
    CflViolation { cfl: f64, limit: f64 },
    #[error("dyadic partition does not cover the grid: need 2^J >= {needed}")]
    Coverage { needed: f64 },
    #[error("range error: {0}")]
    Range(String),
}
