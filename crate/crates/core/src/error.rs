use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("superluminal velocity: 1 + v·v = {radicand} (|v| = {speed})")]
    SuperluminalVelocity { radicand: f64, speed: f64 },

    #[error("adaptive step underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("negative radicand {value} (broken jet)")]
    NegativeRadicand { value: f64 },

    #[error("finite-difference estimates disagree: {coarse} vs {fine}")]
    DerivativeNoise { coarse: f64, fine: f64 },

    #[error("leading matrix A is singular (det = {det})")]
    SingularA { det: f64 },

    #[error("degenerate denominator {value}")]
    DegenerateDenominator { value: f64 },

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("Legendre Jacobian is singular (det = {det})")]
    SingularJacobian { det: f64 },

    #[error("velocity |v| = {speed} lies beyond the fold of the Legendre map")]
    BeyondFold { speed: f64 },

    #[error("spin tensor is not skew-symmetric (defect {defect})")]
    NotSkew { defect: f64 },

    #[error("spin magnitude s3 must be nonzero")]
    ZeroSpin,

    #[error("mass parameter mu must be nonzero")]
    ZeroMu,

    #[error("invalid convention: {0}")]
    InvalidConvention(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed trajectory data: {0}")]
    MalformedTrajectory(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
