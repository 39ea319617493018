//! Hide RSA-encrypted messages in the trailing whitespace of CSS files.
//!
//! Every semicolon that ends a line of a stylesheet can carry an invisible
//! run of spaces and tabs (space = 0, tab = 1) without changing how the file
//! renders. This crate encrypts a message with textbook RSA, serializes the
//! ciphertext blocks into a length-framed bit stream, and spreads that stream
//! over the cover's anchors; extraction reverses each step.
//!
//! The RSA here is the raw schoolbook construction, deliberately: it has no
//! padding and is not semantically secure. Treat the crypto as an obfuscation
//! layer for a covert channel, not as protection for valuable secrets.
//!
//! The `parallel` feature (on by default) runs the batch kernels — block
//! exponentiation and prime screening — on rayon. Outputs are identical with
//! the feature disabled.

pub mod bits;
pub mod css;
pub mod error;
pub mod keyfile;
pub mod pipeline;
pub mod rsa;

pub use error::{Error, Layer, Result};
