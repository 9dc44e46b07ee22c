//! Shift-invariant blur operators and their adjoints.
//!
//! An operator is a 2-D convolution kernel plus a boundary rule. Periodic
//! boundaries make the operator circulant, which gives an exact frequency
//! diagonalization ([`BlurOperator::transfer_function`]) used by the fast
//! solver; symmetric boundaries are supported for fidelity studies and route
//! through the iterative solver instead.

use std::fmt::Write as _;
use std::path::Path;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::fft::Fft2d;
use crate::signal::Signal;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("kernel dimensions must be odd, got {rows}x{cols}")]
    EvenKernel { rows: usize, cols: usize },
    #[error("kernel is empty or ragged")]
    MalformedKernel,
    #[error("kernel entries must be finite")]
    NonFiniteKernel,
    #[error("gaussian sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("kernel size must be a positive odd integer, got {0}")]
    InvalidKernelSize(usize),
    #[error("kernel {kernel_rows}x{kernel_cols} does not fit in signal {width}x{height}")]
    KernelTooLarge {
        kernel_rows: usize,
        kernel_cols: usize,
        width: usize,
        height: usize,
    },
    #[error("no exact frequency diagonalization for symmetric boundaries")]
    SymmetricTransfer,
    #[error("failed to read kernel file: {0}")]
    Io(#[from] std::io::Error),
    #[error("kernel file line {line}: {message}")]
    ParseKernel { line: usize, message: String },
}

/// Convolution boundary handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// Circular wrap-around; the operator is circulant.
    Periodic,
    /// Half-sample mirror extension (edge sample repeated).
    Symmetric,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Symmetric => "symmetric",
        }
    }
}

/// A 2-D convolution kernel with odd dimensions (centered support).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self, OperatorError> {
        if rows == 0 || cols == 0 || weights.len() != rows * cols {
            return Err(OperatorError::MalformedKernel);
        }
        if rows.is_multiple_of(2) || cols.is_multiple_of(2) {
            return Err(OperatorError::EvenKernel { rows, cols });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(OperatorError::NonFiniteKernel);
        }
        Ok(Self {
            rows,
            cols,
            weights,
        })
    }

    /// The 1x1 identity kernel.
    pub fn identity() -> Self {
        Self::new(1, 1, vec![1.0]).expect("identity kernel is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Serializes as plain text: one row per line, whitespace-separated
    /// decimals. Round-trips through [`Kernel::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    out.push(' ');
                }
                // 17 significant digits round-trip f64 exactly.
                let _ = write!(out, "{:.17e}", self.weight(r, c));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, OperatorError> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| OperatorError::ParseKernel {
                    line: idx + 1,
                    message: format!("invalid number {tok:?}"),
                })?;
                row.push(v);
            }
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(OperatorError::ParseKernel {
                        line: idx + 1,
                        message: format!("expected {} columns, found {}", first.len(), row.len()),
                    });
                }
            }
            rows.push(row);
        }
        let n_rows = rows.len();
        let n_cols = rows.first().map(Vec::len).unwrap_or(0);
        let weights = rows.into_iter().flatten().collect();
        Kernel::new(n_rows, n_cols, weights)
    }

    pub fn save(&self, path: &Path) -> Result<(), OperatorError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, OperatorError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// Unit-sum Gaussian sampled on the centered integer grid.
///
/// The continuous Gaussian is truncated to the `size x size` support and then
/// renormalized to sum 1, so the operator has unit DC gain and preserves
/// average brightness.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel, OperatorError> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(OperatorError::InvalidKernelSize(size));
    }
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(OperatorError::NonPositiveSigma(sigma));
    }
    let half = (size / 2) as isize;
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    let mut weights = Vec::with_capacity(size * size);
    for i in -half..=half {
        for j in -half..=half {
            let r2 = (i * i + j * j) as f64;
            weights.push((-r2 * inv_two_sigma_sq).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Kernel::new(size, size, weights)
}

/// A linear post-decompression degradation: convolution by a kernel under a
/// boundary rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurOperator {
    kernel: Kernel,
    boundary: BoundaryMode,
}

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    let n = n as isize;
    (((i % n) + n) % n) as usize
}

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let mut m = ((i % period) + period) % period;
    if m >= n as isize {
        m = period - 1 - m;
    }
    m as usize
}

impl BlurOperator {
    pub fn new(kernel: Kernel, boundary: BoundaryMode) -> Self {
        Self { kernel, boundary }
    }

    pub fn identity(boundary: BoundaryMode) -> Self {
        Self::new(Kernel::identity(), boundary)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    fn check_fits(&self, s: &Signal) -> Result<(), OperatorError> {
        if self.kernel.rows() > s.height() || self.kernel.cols() > s.width() {
            return Err(OperatorError::KernelTooLarge {
                kernel_rows: self.kernel.rows(),
                kernel_cols: self.kernel.cols(),
                width: s.width(),
                height: s.height(),
            });
        }
        Ok(())
    }

    /// Applies the operator: 2-D convolution with the kernel under the
    /// boundary rule. Output dimensions equal input dimensions.
    pub fn apply(&self, s: &Signal) -> Result<Signal, OperatorError> {
        self.check_fits(s)?;
        Ok(self.convolve(s, false))
    }

    /// Applies the transpose of the operator matrix.
    ///
    /// For periodic boundaries this is correlation with the kernel. For
    /// symmetric boundaries the transpose is computed exactly by scattering
    /// each output contribution back through the mirror indexing.
    pub fn apply_adjoint(&self, s: &Signal) -> Result<Signal, OperatorError> {
        self.check_fits(s)?;
        match self.boundary {
            BoundaryMode::Periodic => Ok(self.convolve(s, true)),
            BoundaryMode::Symmetric => Ok(self.scatter_transpose(s)),
        }
    }

    fn convolve(&self, s: &Signal, correlate: bool) -> Signal {
        let (w, h) = (s.width(), s.height());
        let (kr, kc) = (self.kernel.rows(), self.kernel.cols());
        let (cy, cx) = ((kr / 2) as isize, (kc / 2) as isize);
        let src = s.samples();
        let mut out = vec![0.0f64; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut acc = 0.0;
                for a in 0..kr as isize {
                    let dy = a - cy;
                    let sy = if correlate { y + dy } else { y - dy };
                    let iy = match self.boundary {
                        BoundaryMode::Periodic => wrap(sy, h),
                        BoundaryMode::Symmetric => reflect(sy, h),
                    };
                    let row_base = iy * w;
                    for b in 0..kc as isize {
                        let dx = b - cx;
                        let sx = if correlate { x + dx } else { x - dx };
                        let ix = match self.boundary {
                            BoundaryMode::Periodic => wrap(sx, w),
                            BoundaryMode::Symmetric => reflect(sx, w),
                        };
                        acc += self.kernel.weight(a as usize, b as usize) * src[row_base + ix];
                    }
                }
                out[(y as usize) * w + (x as usize)] = acc;
            }
        }
        s.with_samples(out)
    }

    // Exact transpose of the gather-style convolution: for H[p, q] built from
    // out[p] += k[t] * src[index(p, t)], the transpose accumulates
    // out[index(p, t)] += k[t] * src[p].
    fn scatter_transpose(&self, s: &Signal) -> Signal {
        let (w, h) = (s.width(), s.height());
        let (kr, kc) = (self.kernel.rows(), self.kernel.cols());
        let (cy, cx) = ((kr / 2) as isize, (kc / 2) as isize);
        let src = s.samples();
        let mut out = vec![0.0f64; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let v = src[(y as usize) * w + (x as usize)];
                for a in 0..kr as isize {
                    let iy = reflect(y - (a - cy), h);
                    for b in 0..kc as isize {
                        let ix = reflect(x - (b - cx), w);
                        out[iy * w + ix] += self.kernel.weight(a as usize, b as usize) * v;
                    }
                }
            }
        }
        s.with_samples(out)
    }

    /// Eigenvalues of the circulant operator: the 2-D DFT of the kernel
    /// zero-padded and circularly centered to `height x width` (row-major).
    ///
    /// Only defined for periodic boundaries.
    pub fn transfer_function(
        &self,
        width: usize,
        height: usize,
    ) -> Result<Vec<Complex64>, OperatorError> {
        if self.boundary != BoundaryMode::Periodic {
            return Err(OperatorError::SymmetricTransfer);
        }
        if self.kernel.rows() > height || self.kernel.cols() > width {
            return Err(OperatorError::KernelTooLarge {
                kernel_rows: self.kernel.rows(),
                kernel_cols: self.kernel.cols(),
                width,
                height,
            });
        }
        let mut padded = vec![0.0f64; width * height];
        let (cy, cx) = ((self.kernel.rows() / 2) as isize, (self.kernel.cols() / 2) as isize);
        for a in 0..self.kernel.rows() as isize {
            for b in 0..self.kernel.cols() as isize {
                let iy = wrap(a - cy, height);
                let ix = wrap(b - cx, width);
                padded[iy * width + ix] += self.kernel.weight(a as usize, b as usize);
            }
        }
        Ok(Fft2d::new(width, height).forward_real(&padded))
    }
}
