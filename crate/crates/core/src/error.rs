use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("polar decomposition failed: matrix is singular within tolerance")]
    Decomposition,

    #[error("matrix does not commute with J (residual {residual:.3e})")]
    Structure { residual: f64 },

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("not a based loop: endpoint residual {residual:.3e}")]
    NotALoop { residual: f64 },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("unbalanced weights: sum is {sum}")]
    UnbalancedWeights { sum: i64 },

    #[error("not a symplectic direction: antisymmetric residual {residual:.3e}")]
    NotSymplecticDirection { residual: f64 },

    #[error("trajectory left the domain at time {time}")]
    DomainEscape { time: f64 },

    #[error("non-finite value during {0}")]
    NonFinite(&'static str),

    #[error("generating form is not closed (residual {residual:.3e})")]
    NotClosed { residual: f64 },

    #[error("degenerate interval: {0}")]
    Degenerate(String),

    #[error("not null-homotopic: Maslov index {index}")]
    NotNullHomotopic { index: i64 },

    #[error("halving budget exhausted after {halvings} halvings; last |Cal| + bound = {last:.3e} >= {epsilon:.3e}")]
    HalvingExhausted {
        halvings: usize,
        last: f64,
        epsilon: f64,
    },

    #[error("point is off the manifold (residual {residual:.3e})")]
    OffManifold { residual: f64 },

    #[error("not a loop: {0}")]
    NotALoopAction(String),

    #[error("requirements not met: {0}")]
    RequirementsNotMet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
