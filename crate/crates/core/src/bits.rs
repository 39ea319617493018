//! Bit-level plumbing between ciphertext blocks and the whitespace channel.
//!
//! Everything here is most-significant-bit-first. The embedded stream is laid
//! out as a 32-bit big-endian payload length followed by the payload itself
//! ([`frame`]/[`unframe`]); the payload in turn is one fixed-width big-endian
//! integer per ciphertext block followed by a 32-bit trailer holding the exact
//! plaintext bit length ([`cipher_to_bits`]/[`bits_to_cipher`]).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rsa::CipherBlockSeq;

/// Channel alphabet: a space encodes 0.
pub const SPACE: u8 = 0x20;
/// Channel alphabet: a tab encodes 1.
pub const TAB: u8 = 0x09;

/// Ordered bit sequence with an explicit length, packed MSB-first.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        if index >= self.len {
            return None;
        }
        Some(self.bytes[index / 8] & (0x80 >> (index % 8)) != 0)
    }

    pub fn extend(&mut self, other: &BitString) {
        for bit in other.iter() {
            self.push(bit);
        }
    }

    /// Append every bit of `bytes`, MSB-first per byte.
    pub fn push_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            for shift in (0..8).rev() {
                self.push(b >> shift & 1 != 0);
            }
        }
    }

    /// Append `value` as exactly 32 big-endian bits.
    pub fn push_u32(&mut self, value: u32) {
        for shift in (0..32).rev() {
            self.push(value >> shift & 1 != 0);
        }
    }

    /// Append `value` as exactly `width` big-endian bits.
    ///
    /// Panics if the value does not fit in `width` bits.
    pub fn push_uint(&mut self, value: &BigUint, width: usize) {
        assert!(
            value.bits() as usize <= width,
            "value needs {} bits, width is {width}",
            value.bits()
        );
        for pos in (0..width).rev() {
            self.push(value.bit(pos as u64));
        }
    }

    /// Read 32 bits starting at `offset` as a big-endian integer.
    pub fn read_u32(&self, offset: usize) -> Option<u32> {
        if offset + 32 > self.len {
            return None;
        }
        let mut value = 0u32;
        for i in 0..32 {
            value = value << 1 | u32::from(self.get(offset + i).unwrap());
        }
        Some(value)
    }

    /// Read `width` bits starting at `offset` as a big-endian integer.
    pub fn read_uint(&self, offset: usize, width: usize) -> Option<BigUint> {
        if offset + width > self.len {
            return None;
        }
        let mut value = BigUint::zero();
        for i in 0..width {
            value <<= 1;
            if self.get(offset + i).unwrap() {
                value |= BigUint::from(1u8);
            }
        }
        Some(value)
    }

    /// Copy of the bits in `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitString::with_capacity(len);
        for i in 0..len {
            out.push(self.get(start + i).unwrap());
        }
        out
    }

    /// Render as bytes, zero-padding a trailing partial byte on the right.
    pub fn to_bytes_padded(&self) -> Vec<u8> {
        self.bytes.clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i).unwrap())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut bits = BitString::new();
        for bit in iter {
            bits.push(bit);
        }
        bits
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parse a string of `0`/`1` characters.
    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|b| match b {
                b'0' => Ok(false),
                b'1' => Ok(true),
                other => Err(Error::ForeignCharacter { byte: other }),
            })
            .collect()
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString[{}](", self.len)?;
        for bit in self.iter().take(64) {
            write!(f, "{}", u8::from(bit))?;
        }
        if self.len > 64 {
            write!(f, "…")?;
        }
        write!(f, ")")
    }
}

/// Run of space/tab bytes as it appears after an anchor semicolon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WhitespaceRun(Vec<u8>);

impl WhitespaceRun {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<&[u8]> for WhitespaceRun {
    type Error = Error;

    fn try_from(bytes: &[u8]) -> Result<Self> {
        match bytes.iter().find(|b| !matches!(**b, SPACE | TAB)) {
            Some(&byte) => Err(Error::ForeignCharacter { byte }),
            None => Ok(WhitespaceRun(bytes.to_vec())),
        }
    }
}

/// Render bits as whitespace: 0 becomes a space, 1 becomes a tab.
pub fn bits_to_whitespace(bits: &BitString) -> WhitespaceRun {
    WhitespaceRun(bits.iter().map(|bit| if bit { TAB } else { SPACE }).collect())
}

/// Decode a whitespace run back into bits. Exact inverse of
/// [`bits_to_whitespace`]; any byte outside the alphabet is rejected.
pub fn whitespace_to_bits(run: &[u8]) -> Result<BitString> {
    run.iter()
        .map(|&b| match b {
            SPACE => Ok(false),
            TAB => Ok(true),
            byte => Err(Error::ForeignCharacter { byte }),
        })
        .collect()
}

/// Prefix `payload` with its bit length as a 32-bit big-endian header.
pub fn frame(payload: &BitString) -> Result<BitString> {
    let len = u32::try_from(payload.len()).map_err(|_| Error::Overflow)?;
    let mut out = BitString::with_capacity(payload.len() + 32);
    out.push_u32(len);
    out.extend(payload);
    Ok(out)
}

/// Strip the 32-bit length header and return exactly the payload it promises.
/// Surplus bits past the payload are channel padding and are ignored.
pub fn unframe(stream: &BitString) -> Result<BitString> {
    let header = stream.read_u32(0).ok_or(Error::TruncatedStream {
        needed: 32,
        available: stream.len(),
    })? as usize;
    if stream.len() < 32 + header {
        return Err(Error::TruncatedStream {
            needed: 32 + header,
            available: stream.len(),
        });
    }
    Ok(stream.slice(32, header))
}

/// Serialize ciphertext blocks into the payload bit stream: each block as a
/// big-endian integer of exactly `modulus_bits` bits, in order, followed by a
/// 32-bit trailer carrying the exact plaintext bit length.
pub fn cipher_to_bits(cipher: &CipherBlockSeq) -> Result<BitString> {
    let mb = cipher.modulus_bits as usize;
    let total = cipher
        .blocks
        .len()
        .checked_mul(mb)
        .and_then(|n| n.checked_add(32))
        .ok_or(Error::Overflow)?;
    if total as u64 >= 1 << 32 || cipher.plaintext_bit_len >= 1 << 32 {
        return Err(Error::Overflow);
    }
    let mut out = BitString::with_capacity(total);
    for block in &cipher.blocks {
        out.push_uint(block, mb);
    }
    out.push_u32(cipher.plaintext_bit_len as u32);
    Ok(out)
}

/// Exact inverse of [`cipher_to_bits`].
pub fn bits_to_cipher(bits: &BitString, modulus_bits: u32) -> Result<CipherBlockSeq> {
    let mb = modulus_bits as usize;
    assert!(mb > 0, "modulus_bits must be positive");
    let malformed = Error::MalformedStream {
        bits: bits.len(),
        modulus_bits,
    };
    let body = bits.len().checked_sub(32).ok_or(malformed.clone())?;
    if body % mb != 0 {
        return Err(malformed);
    }
    let count = body / mb;
    let blocks = (0..count)
        .map(|i| bits.read_uint(i * mb, mb).unwrap())
        .collect::<Vec<_>>();
    let plaintext_bit_len = bits.read_u32(body).unwrap() as u64;
    let max = count as u64 * (modulus_bits as u64 - 1);
    if plaintext_bit_len > max {
        return Err(Error::LengthFieldInvalid {
            claimed: plaintext_bit_len,
            max,
        });
    }
    Ok(CipherBlockSeq {
        blocks,
        modulus_bits,
        plaintext_bit_len,
    })
}
