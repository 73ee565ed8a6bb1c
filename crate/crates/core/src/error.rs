use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("gamma function pole at {0}")]
    Pole(f64),
    #[error("no convergence in {what}: estimate {value:e}, error {error:e}")]
    NoConvergence { what: String, value: f64, error: f64 },
    #[error("divergent series: {0}")]
    DivergentSeries(String),
    #[error("denominator parameter {0} is a non-positive integer")]
    BadDenominator(f64),
    #[error("s = {s} outside strip ({lower}, {upper})")]
    OutOfStrip { s: f64, lower: f64, upper: f64 },
    #[error("empty strip")]
    EmptyStrip,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("pole collision: {0}")]
    PoleCollision(String),
    #[error("effective argument {x} too close to the branch boundary 1")]
    BoundaryRegion { x: f64 },
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("simple-pole condition violated: {0}")]
    SimplePoleViolation(String),
    #[error("slow decay: {0}")]
    SlowDecay(String),
    #[error("high variance: relative standard error {rel_se:.3}")]
    HighVariance { rel_se: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
}

impl Error {
    /// Errors after which another backend can still produce the value.
    pub fn is_recoverable(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::DivergentSeries(_)
                | Error::PoleCollision(_)
                | Error::BoundaryRegion { .. }
                | Error::SimplePoleViolation(_)
                | Error::SlowDecay(_)
                | Error::Pole(_)
        )
    }
}
