use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution or model parameter is outside its domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// A Normal-Gamma prior with `kappa0 = 0` or `beta0 = 0` was used where a
    /// proper prior is required.
    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),

    #[error("moment undefined: {0}")]
    UndefinedMoment(String),

    #[error("degenerate moments: {0}")]
    DegenerateMoments(String),

    #[error("bound undefined: {0}")]
    UndefinedBound(String),

    /// Input data is malformed (too few samples, non-finite values, length mismatch).
    #[error("invalid data: {0}")]
    Data(String),

    #[error("arm {arm} out of range for {arms} arms")]
    Index { arm: usize, arms: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("ill-conditioned matrix: {0}")]
    Conditioning(String),

    /// An episode failed; carries the run index and policy for context.
    #[error("run {run} of policy `{policy}`: {source}")]
    Episode {
        run: u64,
        policy: String,
        #[source]
        source: Box<Error>,
    },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}

pub(crate) fn data(msg: impl Into<String>) -> Error {
    Error::Data(msg.into())
}
