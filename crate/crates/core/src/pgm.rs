//! Binary PGM (P5) reading and writing, the toolkit's mandatory image format.
//!
//! Export quantizes to 8 bits: samples are clamped to `[0, P]` and rounded.
//! This is the only lossy step outside the codec itself.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::signal::{Signal, SignalError, DEFAULT_SAMPLE_SCALE};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a binary PGM (expected P5 magic)")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("unsupported max value {0} (only 8-bit PGM is supported)")]
    UnsupportedMaxval(u32),
    #[error("pixel payload truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Encodes a signal as an 8-bit binary PGM.
pub fn encode(signal: &Signal) -> Vec<u8> {
    let mut out = Vec::with_capacity(signal.len() + 32);
    let _ = write!(out, "P5\n{} {}\n255\n", signal.width(), signal.height());
    out.extend_from_slice(&signal.to_display_bytes());
    out
}

pub fn save(signal: &Signal, path: &Path) -> Result<(), PgmError> {
    std::fs::write(path, encode(signal))?;
    Ok(())
}

/// Decodes an 8-bit binary PGM. The resulting signal uses the 8-bit peak
/// value 255 as its sample scale regardless of the header's maxval.
pub fn decode(bytes: &[u8]) -> Result<Signal, PgmError> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    if magic != b"P5" {
        return Err(PgmError::BadMagic);
    }
    let width = cursor.unsigned("width")?;
    let height = cursor.unsigned("height")?;
    let maxval = cursor.unsigned("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the payload; the
    // token scanner has already consumed it.
    let expected = (width as usize) * (height as usize);
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    let samples = payload[..expected].iter().map(|&b| b as f64).collect();
    Ok(Signal::new(
        width as usize,
        height as usize,
        samples,
        DEFAULT_SAMPLE_SCALE,
    )?)
}

pub fn load(path: &Path) -> Result<Signal, PgmError> {
    decode(&std::fs::read(path)?)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    /// Next whitespace-delimited token, skipping `#` comments, consuming the
    /// single whitespace byte that terminates it.
    fn token(&mut self) -> Result<&'a [u8], PgmError> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(_) => break,
                None => return Err(PgmError::BadHeader("unexpected end of header".into())),
            }
        }
        let start = self.pos;
        while let Some(b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        let token = &self.bytes[start..self.pos];
        // Consume the single terminating whitespace byte.
        if self.pos < self.bytes.len() {
            self.pos += 1;
        }
        Ok(token)
    }

    fn unsigned(&mut self, field: &str) -> Result<u32, PgmError> {
        let token = self.token()?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::BadHeader(format!("invalid {field}")))
    }
}
