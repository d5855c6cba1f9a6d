use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// The variants distinguish the failure classes callers need to react to:
/// bad call arguments, violated operation contracts (e.g. a non-Hermitian
/// matrix where a Hermitian one is required), inputs outside the
/// permutation-algebra representable set, geometry the world-line diagram
/// does not cover, and hard size caps.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("unsupported decomposition: {0}")]
    UnsupportedDecomposition(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
