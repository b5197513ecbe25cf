use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid number `{0}`")]
    Number(String),

    #[error("non-finite value {0}")]
    NonFinite(String),

    #[error("modulus {0} is not in (0, 1)")]
    ModulusOutOfRange(String),

    #[error("invalid spectral block: {0}")]
    InvalidBlock(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("matrix is derogatory: {0}")]
    Derogatory(String),

    #[error("ill-conditioned eigenstructure: {0}; supply the spectral blocks directly")]
    IllConditioned(String),

    #[error("q undefined: block {0} has an irrational angle")]
    QUndefined(usize),

    #[error("sign of power undefined: {0}")]
    SignUndefined(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("outside the classification hypotheses: {0}")]
    Unsupported(String),

    #[error("norm certificate unavailable: no m <= {cap} with ||M^m|| < 1")]
    NormCertificate { cap: usize },

    #[error("depth {depth} exceeds the cap {cap}")]
    DepthCap { depth: usize, cap: usize },

    #[error("per-address certification requires eventually periodic input")]
    NotPeriodic,

    #[error("invalid address: {0}")]
    InvalidAddress(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system")]
    Singular,
}
