use thiserror::Error;

/// Errors raised by the shaping, metric and link-simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target entropy {target} outside (0, {max}]")]
    EntropyOutOfRange { target: f64, max: f64 },

    #[error("bit word has length {got}, expected {expected}")]
    WordLength { got: usize, expected: usize },

    #[error("sequence length {got} does not match blocklength {expected}")]
    SequenceLength { got: usize, expected: usize },

    #[error("amplitude {0} is not in the alphabet")]
    UnknownAmplitude(u32),

    #[error("sequence composition does not match the codebook composition")]
    CompositionMismatch,

    #[error("sequence composition is not a leaf of the codebook")]
    UnknownComposition,

    #[error("sequence rank is outside the addressable range")]
    RankOverflow,

    #[error("sequence energy {energy} exceeds the sphere bound {e_max}")]
    EnergyOverflow { energy: u64, e_max: u64 },

    #[error("requested {k} bits but at most {max} are addressable")]
    RateTooHigh { k: usize, max: usize },

    #[error("rate {rate} is not achievable with this input distribution")]
    Unachievable { rate: f64 },

    #[error("exponent {exponent} does not fit in {bits} bits")]
    ExponentOverflow { exponent: u32, bits: u32 },

    #[error("configuration inconsistency: {0}")]
    Config(String),

    #[error("decoded amplitudes are not a codeword of the shaper")]
    DeshapeFailure,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
