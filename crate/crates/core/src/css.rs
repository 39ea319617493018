//! Byte-preserving CSS scanning and the whitespace channel itself.
//!
//! An embedding anchor is a semicolon that ends its line: it sits outside
//! comments, strings and `url(...)`, and only spaces/tabs separate it from
//! the next newline (or end of file). Hidden bits ride as a run of spaces and
//! tabs inserted directly after the anchor semicolon, invisible in any
//! rendering of the stylesheet.
//!
//! The scanner never reinterprets or reserializes the stylesheet; every
//! transformation here is a byte splice.

use std::fmt;

use crate::bits::{bits_to_whitespace, whitespace_to_bits, BitString, SPACE, TAB};
use crate::error::{Error, Result};

const LF: u8 = 0x0a;
const CR: u8 = 0x0d;

/// A semicolon eligible to carry a whitespace run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    /// Byte offset of the `;` itself.
    pub semicolon_offset: usize,
    /// Space/tab bytes already sitting between the `;` and the newline/EOF.
    pub existing_trailing: usize,
}

/// Dominant line-ending convention of a stylesheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineEnding {
    #[default]
    Lf,
    CrLf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarningKind {
    UnterminatedString,
    UnterminatedComment,
}

/// A scan defect. Anchors past the defect are excluded rather than guessed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanWarning {
    pub kind: WarningKind,
    /// Byte offset where the unterminated construct opened.
    pub offset: usize,
}

impl fmt::Display for ScanWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            WarningKind::UnterminatedString => "unterminated string",
            WarningKind::UnterminatedComment => "unterminated comment",
        };
        write!(f, "{what} starting at byte {}", self.offset)
    }
}

/// A stylesheet plus the anchors discovered in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssDocument {
    bytes: Vec<u8>,
    anchors: Vec<Anchor>,
    line_ending: LineEnding,
    warnings: Vec<ScanWarning>,
}

impl CssDocument {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn line_ending(&self) -> LineEnding {
        self.line_ending
    }

    pub fn warnings(&self) -> &[ScanWarning] {
        &self.warnings
    }
}

/// Bits carried per anchor. The run written after each anchor semicolon is
/// this many characters (the final run may be shorter).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StegoParams {
    bits_per_anchor: u32,
}

impl StegoParams {
    pub const MAX_BITS_PER_ANCHOR: u32 = 64;

    pub fn new(bits_per_anchor: u32) -> Result<Self> {
        if bits_per_anchor == 0 || bits_per_anchor > Self::MAX_BITS_PER_ANCHOR {
            return Err(Error::InvalidKey("bits per anchor outside 1..=64"));
        }
        Ok(StegoParams { bits_per_anchor })
    }

    pub fn bits_per_anchor(&self) -> u32 {
        self.bits_per_anchor
    }
}

impl Default for StegoParams {
    fn default() -> Self {
        StegoParams { bits_per_anchor: 8 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Normal,
    Comment,
    Single,
    Double,
    Url,
    UrlSingle,
    UrlDouble,
}

/// True when the semicolon at `offset` ends its line: only spaces/tabs up to
/// the next LF, CRLF, or EOF. Returns the trailing run length when it does.
fn trailing_run(bytes: &[u8], offset: usize) -> Option<usize> {
    let mut j = offset + 1;
    while j < bytes.len() && matches!(bytes[j], SPACE | TAB) {
        j += 1;
    }
    let at_eol = j == bytes.len()
        || bytes[j] == LF
        || (bytes[j] == CR && bytes.get(j + 1) == Some(&LF));
    at_eol.then(|| j - offset - 1)
}

/// Identifier characters immediately before `offset` spell `url` (any case).
fn preceded_by_url(bytes: &[u8], offset: usize) -> bool {
    let mut start = offset;
    while start > 0
        && matches!(bytes[start - 1], b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'-' | b'_')
    {
        start -= 1;
    }
    bytes[start..offset].eq_ignore_ascii_case(b"url")
}

fn detect_line_ending(bytes: &[u8]) -> LineEnding {
    let mut crlf = 0usize;
    let mut bare_lf = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        if b == LF {
            if i > 0 && bytes[i - 1] == CR {
                crlf += 1;
            } else {
                bare_lf += 1;
            }
        }
    }
    if crlf > bare_lf {
        LineEnding::CrLf
    } else {
        LineEnding::Lf
    }
}

/// Find every embedding anchor in a stylesheet.
///
/// The state machine skips semicolons inside `/* */` comments, quoted strings
/// (backslash escapes honored) and `url(...)`. A string or comment still open
/// at a newline or EOF is reported as a warning, and anchors past the first
/// such defect are dropped.
pub fn scan(css_bytes: &[u8]) -> CssDocument {
    let bytes = css_bytes;
    let mut anchors = Vec::new();
    let mut warnings = Vec::new();
    let mut state = State::Normal;
    let mut construct_start = 0usize;
    let mut i = 0usize;

    while i < bytes.len() {
        let b = bytes[i];
        match state {
            State::Normal => match b {
                b'/' if bytes.get(i + 1) == Some(&b'*') => {
                    state = State::Comment;
                    construct_start = i;
                    i += 2;
                    continue;
                }
                b'\'' => {
                    state = State::Single;
                    construct_start = i;
                }
                b'"' => {
                    state = State::Double;
                    construct_start = i;
                }
                b'(' if preceded_by_url(bytes, i) => state = State::Url,
                b';' => {
                    if let Some(existing_trailing) = trailing_run(bytes, i) {
                        anchors.push(Anchor {
                            semicolon_offset: i,
                            existing_trailing,
                        });
                    }
                }
                _ => {}
            },
            State::Comment => {
                if b == b'*' && bytes.get(i + 1) == Some(&b'/') {
                    state = State::Normal;
                    i += 2;
                    continue;
                }
            }
            State::Single | State::Double | State::UrlSingle | State::UrlDouble => {
                let quote = if matches!(state, State::Single | State::UrlSingle) {
                    b'\''
                } else {
                    b'"'
                };
                match b {
                    b'\\' => {
                        i += 2;
                        continue;
                    }
                    LF | CR => {
                        // CSS recovers from an unescaped newline in a string,
                        // but the string never closed: record the defect.
                        warnings.push(ScanWarning {
                            kind: WarningKind::UnterminatedString,
                            offset: construct_start,
                        });
                        state = match state {
                            State::UrlSingle | State::UrlDouble => State::Url,
                            _ => State::Normal,
                        };
                    }
                    _ if b == quote => {
                        state = match state {
                            State::UrlSingle | State::UrlDouble => State::Url,
                            _ => State::Normal,
                        };
                    }
                    _ => {}
                }
            }
            State::Url => match b {
                b')' => state = State::Normal,
                b'\'' => {
                    state = State::UrlSingle;
                    construct_start = i;
                }
                b'"' => {
                    state = State::UrlDouble;
                    construct_start = i;
                }
                b'\\' => {
                    i += 2;
                    continue;
                }
                _ => {}
            },
        }
        i += 1;
    }

    match state {
        State::Comment => warnings.push(ScanWarning {
            kind: WarningKind::UnterminatedComment,
            offset: construct_start,
        }),
        State::Single | State::Double | State::UrlSingle | State::UrlDouble => {
            warnings.push(ScanWarning {
                kind: WarningKind::UnterminatedString,
                offset: construct_start,
            })
        }
        State::Normal | State::Url => {}
    }

    if let Some(first_defect) = warnings.iter().map(|w| w.offset).min() {
        anchors.retain(|a| a.semicolon_offset < first_defect);
    }

    CssDocument {
        bytes: bytes.to_vec(),
        anchors,
        line_ending: detect_line_ending(bytes),
        warnings,
    }
}

/// Strip pre-existing space/tab runs from every anchor so the channel starts
/// empty. Bytes away from anchors are untouched; the result rescans cleanly.
pub fn canonicalize(doc: &CssDocument) -> CssDocument {
    if doc.anchors.iter().all(|a| a.existing_trailing == 0) {
        return doc.clone();
    }
    let mut out = Vec::with_capacity(doc.bytes.len());
    let mut copied = 0usize;
    for anchor in &doc.anchors {
        let keep_end = anchor.semicolon_offset + 1;
        out.extend_from_slice(&doc.bytes[copied..keep_end]);
        copied = keep_end + anchor.existing_trailing;
    }
    out.extend_from_slice(&doc.bytes[copied..]);
    scan(&out)
}

/// Payload bits a canonicalized document can carry after the 32-bit frame
/// header: `anchors * k - 32`, floored at zero.
pub fn capacity(doc: &CssDocument, params: &StegoParams) -> u64 {
    (doc.anchors.len() as u64 * params.bits_per_anchor() as u64).saturating_sub(32)
}

/// Write a bit stream into the document: chunk `stream` into runs of
/// `bits_per_anchor` bits (the final run may be shorter) and insert run `i`
/// right after anchor `i`'s semicolon. Every other byte is preserved.
pub fn embed_bits(doc: &CssDocument, stream: &BitString, params: &StegoParams) -> Result<Vec<u8>> {
    debug_assert!(
        doc.anchors.iter().all(|a| a.existing_trailing == 0),
        "embed_bits expects a canonicalized document"
    );
    let k = params.bits_per_anchor() as usize;
    let available = doc.anchors.len() as u64 * k as u64;
    if stream.len() as u64 > available {
        return Err(Error::CapacityExceeded {
            required: stream.len() as u64,
            available,
        });
    }

    let mut out = Vec::with_capacity(doc.bytes.len() + stream.len());
    let mut copied = 0usize;
    for (i, anchor) in doc.anchors.iter().enumerate() {
        let start = i * k;
        if start >= stream.len() {
            break;
        }
        let len = k.min(stream.len() - start);
        let run = bits_to_whitespace(&stream.slice(start, len));
        let keep_end = anchor.semicolon_offset + 1;
        out.extend_from_slice(&doc.bytes[copied..keep_end]);
        out.extend_from_slice(run.as_bytes());
        copied = keep_end;
    }
    out.extend_from_slice(&doc.bytes[copied..]);
    Ok(out)
}

/// Read back every anchor's trailing run, in order, as one bit stream.
///
/// Run lengths are self-describing (whatever sits between the semicolon and
/// the newline), so extraction does not depend on `params`; the parameter is
/// kept so embed and extract share a call shape.
pub fn extract_bits(stego_bytes: &[u8], _params: &StegoParams) -> Result<BitString> {
    let doc = scan(stego_bytes);
    let mut bits = BitString::new();
    for anchor in doc.anchors() {
        let start = anchor.semicolon_offset + 1;
        let run = &stego_bytes[start..start + anchor.existing_trailing];
        bits.extend(&whitespace_to_bits(run)?);
    }
    Ok(bits)
}
