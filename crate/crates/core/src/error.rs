use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree {degree} exceeds the working degree {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("quadrature too small: orthonormality defect {0:.3e}")]
    QuadratureTooSmall(f64),

    #[error("system is not Hurwitz (spectral abscissa {0:.6e})")]
    UnstableSystem(f64),

    #[error("H-infinity bisection could not bracket the norm: {0}")]
    BracketFailure(String),

    #[error("no initial gain admits a feasible P-step")]
    NoFeasibleStart,

    #[error("SDP solver failure: {0}")]
    SolverFailure(String),

    #[error("synthesis infeasible or unstable at the upper bound rho2 = {0}")]
    InfeasibleAtHi(f64),

    #[error("every bisection probe produced an unstable closed loop")]
    AllProbesUnstable,

    #[error("closed loop unstable at parameter sample {0:?}")]
    UnstableSample(Vec<f64>),

    #[error("trajectory blow-up detected at t = {0}")]
    Blowup(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
