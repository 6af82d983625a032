use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must live on the same point set do not.
    CarrierMismatch { expected: usize, found: usize },
    IndexOutOfRange { index: usize, len: usize },
    InvalidSpace(String),
    InvalidParameter(String),
    UnknownGallery(String),
    EmptyChain,
    /// Link `position` (between `seq[position]` and `seq[position + 1]`) is not related.
    InvalidLink { position: usize, from: usize, to: usize },
    IllegalMove(String),
    EndpointMismatch,
    NotClosed,
    NotNested { index: usize },
    LadderTooShort { len: usize },
    Precondition(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CarrierMismatch { expected, found } => {
                write!(f, "carrier mismatch: expected {expected} points, found {found}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "point index {index} out of range for {len} points")
            }
            Error::InvalidSpace(msg) => write!(f, "invalid space: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::UnknownGallery(name) => write!(f, "unknown gallery space `{name}`"),
            Error::EmptyChain => f.write_str("chain must contain at least one point"),
            Error::InvalidLink { position, from, to } => {
                write!(f, "invalid link at position {position}: ({from}, {to}) not related")
            }
            Error::IllegalMove(msg) => write!(f, "illegal move: {msg}"),
            Error::EndpointMismatch => f.write_str("chains do not share endpoints"),
            Error::NotClosed => f.write_str("chain is not closed"),
            Error::NotNested { index } => {
                write!(f, "ladder is not nested at index {index}")
            }
            Error::LadderTooShort { len } => {
                write!(f, "ladder needs at least 2 scales, got {len}")
            }
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
