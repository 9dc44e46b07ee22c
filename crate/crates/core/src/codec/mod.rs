//! The pluggable standard compress/decompress pair.
//!
//! [`ReferenceCodec`] is a self-contained transform codec: 8x8 block DCT,
//! uniform scalar quantization with an HEVC-style QP-to-step mapping, zigzag
//! scan and run-length/Exp-Golomb entropy coding. It accepts and reproduces
//! sample values outside the displayable range, which the encoder loop's
//! over-sharpened intermediates require. [`external::ExternalCodec`] wraps an
//! external encoder/decoder binary behind the same interface.

pub mod bits;
pub mod dct;
pub mod entropy;
pub mod external;

use thiserror::Error;

use crate::signal::{Bitstream, Signal, SignalError, DEFAULT_SAMPLE_SCALE};

use bits::{BitReader, BitWriter};
use dct::{BLOCK, BLOCK_AREA};
use entropy::EntropyError;

/// Highest quality index; mirrors a QP-style 0..=51 scale.
pub const THETA_MAX: u8 = 51;

/// Wire-format magic for the reference codec.
pub const MAGIC: [u8; 4] = *b"NCR1";

/// Header length in bytes: magic, width, height (16-bit big-endian each),
/// theta, block size.
const HEADER_BYTES: usize = 10;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("image {width}x{height} is smaller than one {BLOCK}x{BLOCK} block")]
    ImageTooSmall { width: usize, height: usize },
    #[error("image {width}x{height} exceeds the 16-bit header limit")]
    ImageTooLarge { width: usize, height: usize },
    #[error("quality index {0} out of range 0..={THETA_MAX}")]
    InvalidTheta(u8),
    #[error("bad magic: not a reference-codec stream")]
    BadMagic,
    #[error("invalid header field {field}: {value}")]
    InvalidHeaderField { field: &'static str, value: u64 },
    #[error("payload truncated")]
    Truncated,
    #[error("invalid code word: {0}")]
    InvalidCodeWord(EntropyError),
    #[error("trailing data after the final block")]
    TrailingData,
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("external codec: {0}")]
    External(String),
}

impl From<EntropyError> for CodecError {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::Bits(_) => CodecError::Truncated,
            other => CodecError::InvalidCodeWord(other),
        }
    }
}

/// The standard compress/decompress pair the encoder loop treats as a black
/// box. `theta` regulates the rate-distortion tradeoff.
pub trait Codec: Send + Sync {
    fn compress(&self, signal: &Signal, theta: u8) -> Result<Bitstream, CodecError>;
    fn decompress(&self, bitstream: &Bitstream) -> Result<Signal, CodecError>;

    /// Bit cost used for rate accounting.
    fn rate_of(&self, bitstream: &Bitstream) -> u64 {
        bitstream.bit_length()
    }
}

/// Quantization step for a quality index: `2^((theta - 4) / 6)`, so theta 4
/// is unit step and six steps double it.
pub fn quantization_step(theta: u8) -> f64 {
    2f64.powf((theta as f64 - 4.0) / 6.0)
}

/// Self-contained deterministic transform codec.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceCodec;

impl ReferenceCodec {
    pub fn new() -> Self {
        Self
    }
}

impl Codec for ReferenceCodec {
    fn compress(&self, signal: &Signal, theta: u8) -> Result<Bitstream, CodecError> {
        reference_compress(signal, theta)
    }

    fn decompress(&self, bitstream: &Bitstream) -> Result<Signal, CodecError> {
        reference_decompress(bitstream)
    }
}

/// Encodes a signal. Samples are transformed as-is, with no input clamping:
/// out-of-range values survive the round trip (up to quantization error).
pub fn reference_compress(signal: &Signal, theta: u8) -> Result<Bitstream, CodecError> {
    let (w, h) = (signal.width(), signal.height());
    if w < BLOCK || h < BLOCK {
        return Err(CodecError::ImageTooSmall {
            width: w,
            height: h,
        });
    }
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(CodecError::ImageTooLarge {
            width: w,
            height: h,
        });
    }
    if theta > THETA_MAX {
        return Err(CodecError::InvalidTheta(theta));
    }

    let mut writer = BitWriter::new();
    writer.write_bytes(&MAGIC);
    writer.write_bytes(&(w as u16).to_be_bytes());
    writer.write_bytes(&(h as u16).to_be_bytes());
    writer.write_bytes(&[theta, BLOCK as u8]);

    let step = quantization_step(theta);
    let order = entropy::zigzag_order();
    let blocks_x = w.div_ceil(BLOCK);
    let blocks_y = h.div_ceil(BLOCK);
    let src = signal.samples();
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            // Gather with edge replication for partial border blocks.
            let mut block = [0.0f64; BLOCK_AREA];
            for dy in 0..BLOCK {
                let y = (by * BLOCK + dy).min(h - 1);
                for dx in 0..BLOCK {
                    let x = (bx * BLOCK + dx).min(w - 1);
                    block[dy * BLOCK + dx] = src[y * w + x];
                }
            }
            let coeffs = dct::forward(&block);
            let mut quantized = [0i64; BLOCK_AREA];
            for (scan_pos, &raster) in order.iter().enumerate() {
                quantized[scan_pos] = (coeffs[raster] / step).round() as i64;
            }
            entropy::encode_block(&mut writer, &quantized);
        }
    }

    let (bytes, bit_length) = writer.into_bytes();
    Ok(Bitstream::new(bytes, bit_length).expect("writer accounting is consistent"))
}

/// Decodes a reference-codec stream, bit-exactly inverting the entropy code.
/// Reconstruction is at bin centers; no output clamping is applied.
pub fn reference_decompress(bitstream: &Bitstream) -> Result<Signal, CodecError> {
    let mut reader = BitReader::new(bitstream.bytes(), bitstream.bit_length());
    let header = reader
        .read_bytes(HEADER_BYTES)
        .map_err(|_| CodecError::Truncated)?;
    if header[0..4] != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let w = u16::from_be_bytes([header[4], header[5]]) as usize;
    let h = u16::from_be_bytes([header[6], header[7]]) as usize;
    let theta = header[8];
    let block_size = header[9];
    if w < BLOCK {
        return Err(CodecError::InvalidHeaderField {
            field: "width",
            value: w as u64,
        });
    }
    if h < BLOCK {
        return Err(CodecError::InvalidHeaderField {
            field: "height",
            value: h as u64,
        });
    }
    if theta > THETA_MAX {
        return Err(CodecError::InvalidHeaderField {
            field: "theta",
            value: theta as u64,
        });
    }
    if block_size as usize != BLOCK {
        return Err(CodecError::InvalidHeaderField {
            field: "block_size",
            value: block_size as u64,
        });
    }

    let step = quantization_step(theta);
    let order = entropy::zigzag_order();
    let blocks_x = w.div_ceil(BLOCK);
    let blocks_y = h.div_ceil(BLOCK);
    let mut samples = vec![0.0f64; w * h];
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let quantized = entropy::decode_block(&mut reader)?;
            let mut coeffs = [0.0f64; BLOCK_AREA];
            for (scan_pos, &raster) in order.iter().enumerate() {
                coeffs[raster] = quantized[scan_pos] as f64 * step;
            }
            let block = dct::inverse(&coeffs);
            for dy in 0..BLOCK {
                let y = by * BLOCK + dy;
                if y >= h {
                    break;
                }
                for dx in 0..BLOCK {
                    let x = bx * BLOCK + dx;
                    if x >= w {
                        break;
                    }
                    samples[y * w + x] = block[dy * BLOCK + dx];
                }
            }
        }
    }
    if reader.remaining() >= 8 {
        return Err(CodecError::TrailingData);
    }
    // Padding to the byte boundary must be zero bits.
    while reader.remaining() > 0 {
        if reader.read_bit().map_err(|_| CodecError::Truncated)? {
            return Err(CodecError::TrailingData);
        }
    }
    Ok(Signal::new(w, h, samples, DEFAULT_SAMPLE_SCALE)?)
}
