use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("the analytic field model requires hole size == separation (got {hole_um} um vs {separation_um} um)")]
    UnequalHoleSeparation { hole_um: f64, separation_um: f64 },

    #[error("z = {z:.6e} m lies below the film top z = {film_top:.6e} m")]
    OutsideDomain { z: f64, film_top: f64 },

    #[error("negative field radicand {value:.3e} T^2 beyond rounding guard")]
    NegativeRadicand { value: f64 },

    #[error("field derivative requested at a field zero (|B| = {magnitude:.3e} T)")]
    SingularPoint { magnitude: f64 },

    #[error("minimizer did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("stationary point is not a minimum: curvature {curvature:?}")]
    NotAMinimum { curvature: [f64; 3] },

    #[error("degenerate minimum: {reason}")]
    DegenerateMinimum { reason: String },

    #[error("curvatures along x and y differ by {relative:.3e} (relative) at the trap centre")]
    AsymmetricCurvature { relative: f64 },

    #[error("sites are not adjacent: separation {separation:.6e} m exceeds {limit:.6e} m")]
    NonAdjacentSites { separation: f64, limit: f64 },

    #[error("non-positive value for {what}: {value:e}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("quadrature did not converge: {value:.12e} vs {coarse:.12e} at half resolution (relative change {relative_change:.3e})")]
    QuadratureNotConverged {
        value: f64,
        coarse: f64,
        relative_change: f64,
    },

    #[error("population imbalance {value} outside the open interval (-1, 1)")]
    PopulationOutOfRange { value: f64 },

    #[error("trajectory reached |N| = 1 singularity at t = {time}: last good state N = {n_tilde}, theta = {theta}")]
    Singularity { time: f64, n_tilde: f64, theta: f64 },

    #[error("chain norm drifted by {drift:.3e} at t = {time}")]
    NormDrift { time: f64, drift: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::InvalidParameter { .. }
            | Error::UnequalHoleSeparation { .. }
            | Error::OutsideDomain { .. }
            | Error::NonAdjacentSites { .. }
            | Error::PopulationOutOfRange { .. }
            | Error::DimensionMismatch(_)
            | Error::InvalidArgument(_) => ErrorKind::Config,
            _ => ErrorKind::Numerical,
        }
    }

    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
