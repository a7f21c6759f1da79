use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("potential evaluated at a singularity: ({q1}, {q2})")]
    Singularity { q1: f64, q2: f64 },

    #[error("mass ratio {0} is outside [0, 1]")]
    InvalidMassRatio(f64),

    #[error("mass ratio {0} is degenerate (rotating Kepler limit)")]
    DegenerateMass(f64),

    #[error("operation not supported for this system: {0}")]
    Unsupported(&'static str),

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("energy {c} is within {tolerance:e} of the critical value {critical}")]
    NearCriticalEnergy { c: f64, critical: f64, tolerance: f64 },

    #[error("no seed point found for the requested curve: {0}")]
    SeedNotFound(String),

    #[error("curve did not close after {steps} steps")]
    NoClosure { steps: usize },

    #[error("trajectory did not return to the axis before t = {t_max}")]
    NoReturn { t_max: f64 },

    #[error("curve tracing step size underflow at ({q1}, {q2})")]
    TraceUnderflow { q1: f64, q2: f64 },

    #[error("integration step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("trajectory came within the guard radius of a singularity at t = {t}")]
    SingularityApproach { t: f64 },

    #[error("integration exceeded {0} steps")]
    MaxSteps(usize),

    #[error("iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("initial guess q1 = {q1} is outside the Hill's region at energy {c}")]
    GuessOutsideRegion { q1: f64, c: f64 },

    #[error("invalid parameter path: {0}")]
    InvalidPath(String),

    #[error("vertical tangent count changed to {count} at mu = {mu}, c = {c}")]
    CountChanged { mu: f64, c: f64, count: usize },

    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error("curve is not closed")]
    NotClosed,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that mean a claim checked by this crate was numerically violated,
    /// as opposed to bad input or a solver giving up.
    pub fn is_verification_failure(&self) -> bool {
        matches!(self, Error::CountChanged { .. } | Error::CertificationFailed(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
