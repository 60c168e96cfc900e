use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A finite support certifying the requested relative tail mass could
    /// not be found within the iteration cap.
    #[error("truncation not certified for weight kind `{kind}`: {detail}")]
    TruncationNotCertified { kind: String, detail: String },

    /// Sampler truncation depth (warm-up) cannot satisfy the L2 budget.
    #[error("sampler truncation depth not certifiable for `{model}`: {detail}")]
    SamplerTruncation { model: String, detail: String },

    /// A stated precondition does not hold for the given input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two quadrature refinement levels disagree beyond tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    /// Bilinear form requires an autocovariance lag beyond the certified range.
    #[error("lag {lag} exceeds certified autocovariance range (k_max = {k_max}, no tail bound)")]
    LagOutOfRange { lag: usize, k_max: usize },

    /// The model exposes no analytic conditional structure for this check.
    #[error("inconclusive: no analytic conditional structure for `{model}`")]
    NoAnalyticStructure { model: String },

    /// Invalid experiment configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
