//! Signals and compressed bitstreams.
//!
//! A [`Signal`] is a real-valued grayscale image stored row-major. Values are
//! deliberately *not* clamped to the displayable range: the encoder loop works
//! with over-sharpened intermediates that legitimately leave `[0, P]`, and
//! clamping only happens at image-file export.

use thiserror::Error;

/// Default peak sample value for 8-bit sources.
pub const DEFAULT_SAMPLE_SCALE: f64 = 255.0;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("sample buffer has {actual} samples, expected {expected} ({width}x{height})")]
    LengthMismatch {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("signal contains a non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("signal dimensions must be nonzero (got {width}x{height})")]
    EmptyDimensions { width: usize, height: usize },
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
}

/// A real-valued 2-D image, row-major, with its peak source value `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    width: usize,
    height: usize,
    samples: Vec<f64>,
    sample_scale: f64,
}

impl Signal {
    /// Builds a signal, validating the buffer length and that every sample is
    /// finite. Values outside `[0, P]` are allowed.
    pub fn new(
        width: usize,
        height: usize,
        samples: Vec<f64>,
        sample_scale: f64,
    ) -> Result<Self, SignalError> {
        if width == 0 || height == 0 {
            return Err(SignalError::EmptyDimensions { width, height });
        }
        let expected = width * height;
        if samples.len() != expected {
            return Err(SignalError::LengthMismatch {
                width,
                height,
                expected,
                actual: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            samples,
            sample_scale,
        })
    }

    /// Builds a signal from already-validated parts. Internal arithmetic uses
    /// this to avoid rescanning buffers whose finiteness follows from finite
    /// inputs.
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        samples: Vec<f64>,
        sample_scale: f64,
    ) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            samples,
            sample_scale,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::from_parts(width, height, vec![0.0; width * height], DEFAULT_SAMPLE_SCALE)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::from_parts(width, height, vec![value; width * height], DEFAULT_SAMPLE_SCALE)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of samples `N = width * height`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Peak source value `P` (255 for 8-bit material).
    pub fn sample_scale(&self) -> f64 {
        self.sample_scale
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    pub fn same_dimensions(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_dimensions(&self, other: &Self) -> Result<(), SignalError> {
        if self.same_dimensions(other) {
            Ok(())
        } else {
            Err(SignalError::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            })
        }
    }

    /// Replaces the sample buffer, keeping dimensions and scale.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self::from_parts(self.width, self.height, samples, self.sample_scale)
    }

    /// Element-wise `self + other`.
    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_dimensions(other), "signal dimension mismatch");
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        self.with_samples(samples)
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.same_dimensions(other), "signal dimension mismatch");
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        self.with_samples(samples)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let samples = self.samples.iter().map(|v| v * factor).collect();
        self.with_samples(samples)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert!(self.same_dimensions(other), "signal dimension mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Euclidean norm of the sample vector.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Rounds and clamps samples to `[0, P]` for 8-bit export. This is the
    /// only place the pipeline leaves the unconstrained real domain.
    pub fn to_display_bytes(&self) -> Vec<u8> {
        let scale = self.sample_scale;
        self.samples
            .iter()
            .map(|&v| v.clamp(0.0, scale).round() as u8)
            .collect()
    }
}

/// A variable-length binary compressed description with exact bit accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    bytes: Vec<u8>,
    bit_length: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bit_length {bit_length} inconsistent with {byte_count} bytes")]
pub struct BitstreamLengthError {
    pub bit_length: u64,
    pub byte_count: usize,
}

impl Bitstream {
    /// Wraps raw bytes with their exact meaningful bit count. The final byte
    /// must contain at least one meaningful bit.
    pub fn new(bytes: Vec<u8>, bit_length: u64) -> Result<Self, BitstreamLengthError> {
        let max = bytes.len() as u64 * 8;
        let min = (bytes.len() as u64).saturating_sub(1) * 8;
        if bit_length > max || (bit_length <= min && !bytes.is_empty()) {
            return Err(BitstreamLengthError {
                bit_length,
                byte_count: bytes.len(),
            });
        }
        Ok(Self { bytes, bit_length })
    }

    /// Wraps bytes read back from storage, where every byte counts toward the
    /// rate (external codecs report whole files).
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_length = bytes.len() as u64 * 8;
        Self { bytes, bit_length }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Exact number of meaningful bits, used for all rate accounting.
    pub fn bit_length(&self) -> u64 {
        self.bit_length
    }

    /// Bits per pixel relative to a signal of `n` samples.
    pub fn bits_per_pixel(&self, n: usize) -> f64 {
        self.bit_length as f64 / n as f64
    }
}
