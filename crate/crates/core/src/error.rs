use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid photon-number distribution: {0}")]
    InvalidDistribution(String),

    /// No distribution on `0..=dim` has mean `nbar`.
    #[error(
        "infeasible problem: mean photon number {nbar} exceeds the largest \
         attainable mean {dim} on the truncated support 0..={dim}"
    )]
    Infeasible { nbar: f64, dim: usize },

    /// The restricted KKT system is singular.
    #[error("degenerate free set of size {size}: need at least two distinct indices")]
    DegenerateFreeSet { size: usize },

    #[error("active-set iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
