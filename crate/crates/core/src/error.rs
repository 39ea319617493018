use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Protocol layer a failure belongs to. Extraction errors name the layer so
/// a corrupted stego file can be diagnosed: the channel carried too few bits,
/// the framing was inconsistent, or the ciphertext itself was invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Channel,
    Framing,
    Crypto,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Channel => f.write_str("channel"),
            Layer::Framing => f.write_str("framing"),
            Layer::Crypto => f.write_str("crypto"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The modulus is too small to form at least 8-bit plaintext groups.
    #[error("modulus too small: |n| = {modulus_bits} bits, need at least 9")]
    KeyTooSmall { modulus_bits: u32 },

    /// A ciphertext block is not smaller than the modulus.
    #[error("ciphertext block {index} is not smaller than the modulus")]
    BlockOutOfRange { index: usize },

    /// The plaintext length carried by the cipher exceeds what its blocks can hold.
    #[error("plaintext length claims {claimed} bits but the blocks hold at most {max}")]
    LengthMismatch { claimed: u64, max: u64 },

    /// A bit stream grew past what a 32-bit length field can describe.
    #[error("bit stream too long for the 32-bit length header")]
    Overflow,

    /// The recovered bit stream is not a whole number of blocks plus trailer.
    #[error("stream of {bits} bits does not split into {modulus_bits}-bit blocks plus a 32-bit trailer")]
    MalformedStream { bits: usize, modulus_bits: u32 },

    /// The plaintext-length trailer claims more bits than the blocks can carry.
    #[error("length trailer claims {claimed} bits but at most {max} are recoverable")]
    LengthFieldInvalid { claimed: u64, max: u64 },

    /// A byte outside the space/tab alphabet appeared in a whitespace run.
    #[error("byte 0x{byte:02x} is not in the whitespace alphabet")]
    ForeignCharacter { byte: u8 },

    /// The framed stream ended before the length promised by its header.
    #[error("truncated stream: need {needed} bits, found {available}")]
    TruncatedStream { needed: usize, available: usize },

    /// The framed payload does not fit in the cover's anchors.
    #[error("payload needs {required} bits but the cover provides {available}")]
    CapacityExceeded { required: u64, available: u64 },

    /// A key violates its invariants (e.g. exponent out of range).
    #[error("invalid key: {0}")]
    InvalidKey(&'static str),

    /// A key file failed to parse.
    #[error("malformed key file: {0}")]
    MalformedKeyFile(String),
}

impl Error {
    /// Which protocol layer produced this error.
    pub fn layer(&self) -> Layer {
        match self {
            Error::ForeignCharacter { .. } | Error::TruncatedStream { .. } => Layer::Channel,
            Error::MalformedStream { .. }
            | Error::LengthFieldInvalid { .. }
            | Error::Overflow
            | Error::CapacityExceeded { .. } => Layer::Framing,
            Error::KeyTooSmall { .. }
            | Error::BlockOutOfRange { .. }
            | Error::LengthMismatch { .. }
            | Error::InvalidKey(_)
            | Error::MalformedKeyFile(_) => Layer::Crypto,
        }
    }
}
