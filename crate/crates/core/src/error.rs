use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("incompatible moduli: {left} vs {right}")]
    IncompatibleModuli { left: u64, right: u64 },

    #[error("no inverse of zero")]
    ZeroInverse,

    #[error(
        "not enough distinct evaluation points: need {needed} nonzero points in GF({modulus})"
    )]
    NotEnoughPoints { needed: usize, modulus: u64 },

    #[error("invalid code matrix: {0}")]
    InvalidMatrix(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("insufficient side information: {known} known values, {needed} required")]
    InsufficientSideInformation { known: usize, needed: usize },

    #[error("singular system")]
    Singular,

    #[error("codeword is inconsistent with the known values")]
    InconsistentCodeword,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(
        "instance too large for exhaustive search: K = {k} exceeds cap {cap}; use the closed form"
    )]
    OverCap { k: usize, cap: usize },

    #[error("invalid demand specification: {0}")]
    InvalidSpec(String),

    #[error("layout does not match plan: {0}")]
    InvalidLayout(String),

    #[error("index {index} out of range 1..={k}")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("retrieval condition violated: {0}")]
    RetrievalViolated(String),

    #[error("decoded value for message {index} does not match the database")]
    DecodeMismatch { index: usize },

    #[error("enumeration exceeded {0} random branches")]
    BranchCapExceeded(usize),

    #[error("layout is unreachable under the construction")]
    Unreachable,

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("transport failure: {0}")]
    Transport(String),
}
