//! Run-length coefficient coding over order-0 Exp-Golomb code words.
//!
//! Block layout: zigzag-scanned coefficients become a sequence of
//! `(zero_run, nonzero_value)` pairs. Runs are unsigned Exp-Golomb, values
//! signed Exp-Golomb. The reserved run symbol [`EOB`] says the rest of the
//! block is zero; it is omitted when the final coefficient is nonzero.

use std::sync::OnceLock;

use thiserror::Error;

use super::bits::{BitReadError, BitReader, BitWriter};
use super::dct::BLOCK_AREA;

/// Run symbol meaning "no further nonzero coefficients in this block".
pub const EOB: u64 = BLOCK_AREA as u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntropyError {
    #[error(transparent)]
    Bits(#[from] BitReadError),
    #[error("exp-golomb prefix exceeds 64 bits")]
    PrefixTooLong,
    #[error("zero run {run} overflows block position {pos}")]
    RunOverflow { run: u64, pos: usize },
    #[error("coefficient value 0 is not a valid (run, value) pair")]
    ZeroValue,
}

/// Unsigned order-0 Exp-Golomb.
pub fn write_unsigned(w: &mut BitWriter, value: u64) {
    let x = value + 1;
    let bits = 64 - x.leading_zeros();
    w.write_bits(0, bits - 1);
    w.write_bits(x, bits);
}

pub fn read_unsigned(r: &mut BitReader) -> Result<u64, EntropyError> {
    let mut zeros = 0u32;
    while !r.read_bit()? {
        zeros += 1;
        if zeros > 63 {
            return Err(EntropyError::PrefixTooLong);
        }
    }
    let rest = r.read_bits(zeros)?;
    Ok(((1u64 << zeros) | rest) - 1)
}

/// Signed values map onto the unsigned code as `1 -> 1, -1 -> 2, 2 -> 3, ...`.
pub fn write_signed(w: &mut BitWriter, value: i64) {
    let mapped = if value > 0 {
        (value as u64) * 2 - 1
    } else {
        (-value as u64) * 2
    };
    write_unsigned(w, mapped);
}

pub fn read_signed(r: &mut BitReader) -> Result<i64, EntropyError> {
    let mapped = read_unsigned(r)?;
    Ok(if mapped % 2 == 1 {
        mapped.div_ceil(2) as i64
    } else {
        -((mapped / 2) as i64)
    })
}

/// Encodes one zigzag-ordered coefficient block.
pub fn encode_block(w: &mut BitWriter, coeffs: &[i64; BLOCK_AREA]) {
    let mut pos = 0;
    while pos < BLOCK_AREA {
        match coeffs[pos..].iter().position(|&c| c != 0) {
            None => {
                write_unsigned(w, EOB);
                return;
            }
            Some(run) => {
                write_unsigned(w, run as u64);
                write_signed(w, coeffs[pos + run]);
                pos += run + 1;
            }
        }
    }
}

/// Decodes one zigzag-ordered coefficient block.
pub fn decode_block(r: &mut BitReader) -> Result<[i64; BLOCK_AREA], EntropyError> {
    let mut coeffs = [0i64; BLOCK_AREA];
    let mut pos = 0usize;
    while pos < BLOCK_AREA {
        let run = read_unsigned(r)?;
        if run == EOB {
            return Ok(coeffs);
        }
        if run >= (BLOCK_AREA - pos) as u64 {
            return Err(EntropyError::RunOverflow { run, pos });
        }
        let value = read_signed(r)?;
        if value == 0 {
            return Err(EntropyError::ZeroValue);
        }
        pos += run as usize;
        coeffs[pos] = value;
        pos += 1;
    }
    Ok(coeffs)
}

/// Zigzag scan order mapping scan position to raster index within a block.
pub fn zigzag_order() -> &'static [usize; BLOCK_AREA] {
    static ORDER: OnceLock<[usize; BLOCK_AREA]> = OnceLock::new();
    ORDER.get_or_init(|| {
        let mut order = [0usize; BLOCK_AREA];
        let mut idx = 0;
        for s in 0..15usize {
            let lo = s.saturating_sub(7);
            let hi = s.min(7);
            if s % 2 == 0 {
                // Walk up-right: row descending.
                for r in (lo..=hi).rev() {
                    order[idx] = r * 8 + (s - r);
                    idx += 1;
                }
            } else {
                for r in lo..=hi {
                    order[idx] = r * 8 + (s - r);
                    idx += 1;
                }
            }
        }
        order
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsigned_code_round_trip() {
        let mut w = BitWriter::new();
        let values = [0u64, 1, 2, 3, 7, 8, 64, 1023, 1 << 40];
        for &v in &values {
            write_unsigned(&mut w, v);
        }
        let (bytes, len) = w.into_bytes();
        let mut r = BitReader::new(&bytes, len);
        for &v in &values {
            assert_eq!(read_unsigned(&mut r).unwrap(), v);
        }
    }

    #[test]
    fn signed_code_round_trip() {
        let mut w = BitWriter::new();
        let values = [0i64, 1, -1, 2, -2, 1000, -9999, i32::MAX as i64];
        for &v in &values {
            write_signed(&mut w, v);
        }
        let (bytes, len) = w.into_bytes();
        let mut r = BitReader::new(&bytes, len);
        for &v in &values {
            assert_eq!(read_signed(&mut r).unwrap(), v);
        }
    }

    #[test]
    fn known_code_words() {
        // value 0 is the single bit '1'; value 1 is '010'.
        let mut w = BitWriter::new();
        write_unsigned(&mut w, 0);
        write_unsigned(&mut w, 1);
        let (bytes, len) = w.into_bytes();
        assert_eq!(len, 4);
        assert_eq!(bytes, vec![0b1010_0000]);
    }

    #[test]
    fn block_round_trip_with_trailing_nonzero() {
        let mut coeffs = [0i64; BLOCK_AREA];
        coeffs[0] = 5;
        coeffs[10] = -3;
        coeffs[63] = 1;
        let mut w = BitWriter::new();
        encode_block(&mut w, &coeffs);
        let (bytes, len) = w.into_bytes();
        let mut r = BitReader::new(&bytes, len);
        assert_eq!(decode_block(&mut r).unwrap(), coeffs);
        assert_eq!(r.remaining(), 0, "no EOB after a final nonzero");
    }

    #[test]
    fn all_zero_block_is_one_symbol() {
        let coeffs = [0i64; BLOCK_AREA];
        let mut w = BitWriter::new();
        encode_block(&mut w, &coeffs);
        let (bytes, len) = w.into_bytes();
        let mut r = BitReader::new(&bytes, len);
        assert_eq!(decode_block(&mut r).unwrap(), coeffs);
        // ue(64) is 13 bits.
        assert_eq!(len, 13);
    }

    #[test]
    fn rejects_run_overflow_and_zero_value() {
        // run 70 at position 0 cannot fit in a block.
        let mut w = BitWriter::new();
        write_unsigned(&mut w, 70);
        write_signed(&mut w, 1);
        let (bytes, len) = w.into_bytes();
        let mut r = BitReader::new(&bytes, len);
        assert!(matches!(
            decode_block(&mut r),
            Err(EntropyError::RunOverflow { run: 70, pos: 0 })
        ));

        let mut w = BitWriter::new();
        write_unsigned(&mut w, 0);
        write_signed(&mut w, 0);
        let (bytes, len) = w.into_bytes();
        let mut r = BitReader::new(&bytes, len);
        assert_eq!(decode_block(&mut r), Err(EntropyError::ZeroValue));
    }

    #[test]
    fn zigzag_matches_classic_order() {
        let order = zigzag_order();
        assert_eq!(
            &order[..16],
            &[0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5]
        );
        let mut seen = [false; BLOCK_AREA];
        for &i in order.iter() {
            assert!(!seen[i]);
            seen[i] = true;
        }
    }
}
