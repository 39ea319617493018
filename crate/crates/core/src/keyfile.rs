//! Plain-text key files: one record per line, decimal integers.
//!
//! ```text
//! css-stego-key v1
//! kind pub
//! n 3233
//! e 17
//! ```
//!
//! Private keys use `kind priv` and a `d` line. Files end with a single
//! newline. Unknown versions and missing fields are rejected.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::rsa::{RsaPrivateKey, RsaPublicKey};

pub const MAGIC: &str = "css-stego-key v1";

/// Either half of a key pair, as read from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyFile {
    Public(RsaPublicKey),
    Private(RsaPrivateKey),
}

pub fn encode_public(key: &RsaPublicKey) -> String {
    format!("{MAGIC}\nkind pub\nn {}\ne {}\n", key.n(), key.e())
}

pub fn encode_private(key: &RsaPrivateKey) -> String {
    format!("{MAGIC}\nkind priv\nn {}\nd {}\n", key.n(), key.d())
}

fn field<'a>(line: Option<&'a str>, name: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::MalformedKeyFile(format!("missing `{name}` line")))?;
    line.strip_prefix(name)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::MalformedKeyFile(format!("expected `{name} <value>`, got `{line}`")))
}

fn decimal(value: &str, name: &str) -> Result<BigUint> {
    value
        .parse()
        .map_err(|_| Error::MalformedKeyFile(format!("`{name}` is not a decimal integer")))
}

pub fn parse(text: &str) -> Result<KeyFile> {
    let mut lines = text.lines();
    match lines.next() {
        Some(MAGIC) => {}
        Some(other) => {
            return Err(Error::MalformedKeyFile(format!(
                "unknown version line `{other}`"
            )))
        }
        None => return Err(Error::MalformedKeyFile("empty file".into())),
    }
    let kind = field(lines.next(), "kind")?.to_owned();
    let n = decimal(field(lines.next(), "n")?, "n")?;
    let key = match kind.as_str() {
        "pub" => {
            let e = decimal(field(lines.next(), "e")?, "e")?;
            KeyFile::Public(RsaPublicKey::new(e, n)?)
        }
        "priv" => {
            let d = decimal(field(lines.next(), "d")?, "d")?;
            KeyFile::Private(RsaPrivateKey::new(d, n)?)
        }
        other => {
            return Err(Error::MalformedKeyFile(format!(
                "kind must be `pub` or `priv`, got `{other}`"
            )))
        }
    };
    if lines.any(|line| !line.trim().is_empty()) {
        return Err(Error::MalformedKeyFile("trailing content after key".into()));
    }
    Ok(key)
}
