//! Shared 2-D FFT plumbing on row-major buffers.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached forward/inverse plans for one image size. Plans are `Arc`s, so the
/// whole struct is cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Fft2d {
    width: usize,
    height: usize,
    forward_row: Arc<dyn Fft<f64>>,
    forward_col: Arc<dyn Fft<f64>>,
    inverse_row: Arc<dyn Fft<f64>>,
    inverse_col: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2d")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            forward_row: planner.plan_fft_forward(width),
            forward_col: planner.plan_fft_forward(height),
            inverse_row: planner.plan_fft_inverse(width),
            inverse_col: planner.plan_fft_inverse(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn transform(&self, data: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.width * self.height);
        let mut scratch = vec![Complex64::default(); row.get_inplace_scratch_len()];
        for r in data.chunks_exact_mut(self.width) {
            row.process_with_scratch(r, &mut scratch);
        }
        // Columns via transpose, row pass, transpose back.
        let mut t = transpose(data, self.width, self.height);
        let mut scratch = vec![Complex64::default(); col.get_inplace_scratch_len()];
        for r in t.chunks_exact_mut(self.height) {
            col.process_with_scratch(r, &mut scratch);
        }
        let back = transpose(&t, self.height, self.width);
        data.copy_from_slice(&back);
    }

    /// Unnormalized forward DFT, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward_row, &self.forward_col);
    }

    /// Inverse DFT with the 1/(W*H) normalization applied, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse_row, &self.inverse_col);
        let scale = 1.0 / (self.width * self.height) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Forward DFT of a real buffer.
    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut out);
        out
    }

    /// Inverse DFT keeping only the real part (inputs are spectra of real
    /// images, so the imaginary residue is roundoff).
    pub fn inverse_to_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut data);
        data.into_iter().map(|v| v.re).collect()
    }
}

fn transpose(data: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = data[y * width + x];
        }
    }
    out
}
