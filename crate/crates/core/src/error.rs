use thiserror::Error;

/// Errors produced by the channel, QFI, bound and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("process matrix has eigenvalue {0:e} below -1e-9; not a valid channel")]
    NegativeEigenvalue(f64),

    #[error("Kraus derivative ill-conditioned: eigenvalue gap {gap:e} between coupled eigenvectors")]
    DegenerateDerivative { gap: f64 },

    #[error("{n} qubits exceeds the dense-simulation cap of {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("no interior maximum over t in ({t_lo:e}, {t_hi:e}]: objective still improving at the edge")]
    NoInteriorMaximum { t_lo: f64, t_hi: f64 },

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("semidefinite program is infeasible")]
    SdpInfeasible,

    #[error("semidefinite program is unbounded")]
    SdpUnbounded,

    #[error("semidefinite program did not converge (relative gap {gap:e})")]
    SdpNotConverged { gap: f64 },

    #[error("need at least {needed} points for a fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
