//! Independent dense oracles for the numeric test suites.
//!
//! Everything here is built from first principles — explicit N x N operator
//! matrices, an LU direct solver, dense evaluation of the expected
//! distortion, and quadrature — deliberately sharing no code with the
//! implementation paths it cross-checks.

#![allow(dead_code)]

use netcomp_core::operators::{BoundaryMode, Kernel};
use netcomp_core::signal::Signal;
use rand::Rng;

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = 1.0;
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *t.at_mut(c, r) = self.at(r, c);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    *out.at_mut(r, c) += a * other.at(k, c);
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, factor: f64) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }
}

fn oracle_wrap(i: isize, n: usize) -> usize {
    let n = n as isize;
    (((i % n) + n) % n) as usize
}

fn oracle_reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let mut m = ((i % period) + period) % period;
    if m >= n as isize {
        m = period - 1 - m;
    }
    m as usize
}

/// Materializes the N x N matrix of "convolve with `kernel` under
/// `boundary`" for a `width x height` image, from the definition:
/// `out[y, x] = sum_{a,b} k[a, b] * in[index(y - (a - cy)), index(x - (b - cx))]`.
pub fn dense_operator_matrix(
    kernel: &Kernel,
    boundary: BoundaryMode,
    width: usize,
    height: usize,
) -> DenseMatrix {
    let n = width * height;
    let mut m = DenseMatrix::zeros(n, n);
    let (cy, cx) = ((kernel.rows() / 2) as isize, (kernel.cols() / 2) as isize);
    for y in 0..height as isize {
        for x in 0..width as isize {
            let row = (y as usize) * width + (x as usize);
            for a in 0..kernel.rows() as isize {
                for b in 0..kernel.cols() as isize {
                    let (sy, sx) = (y - (a - cy), x - (b - cx));
                    let (iy, ix) = match boundary {
                        BoundaryMode::Periodic => (oracle_wrap(sy, height), oracle_wrap(sx, width)),
                        BoundaryMode::Symmetric => {
                            (oracle_reflect(sy, height), oracle_reflect(sx, width))
                        }
                    };
                    *m.at_mut(row, iy * width + ix) += kernel.weight(a as usize, b as usize);
                }
            }
        }
    }
    m
}

/// Dense evaluation of the expected distortion
/// `(1/N) sum_k p_k ||x - H_k v||^2` using explicit operator matrices.
pub fn dense_expected_distortion(
    x: &[f64],
    v: &[f64],
    operators: &[(DenseMatrix, f64)],
) -> f64 {
    let n = x.len() as f64;
    operators
        .iter()
        .map(|(h, p)| {
            let hv = h.matvec(v);
            let sq: f64 = x.iter().zip(&hv).map(|(a, b)| (a - b) * (a - b)).sum();
            p * sq
        })
        .sum::<f64>()
        / n
}

/// LU solve with partial pivoting; consumes the matrix.
pub fn lu_solve(mut a: DenseMatrix, mut b: Vec<f64>) -> Vec<f64> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a.at(i, col).abs().total_cmp(&a.at(j, col).abs()))
            .unwrap();
        assert!(a.at(pivot, col).abs() > 1e-300, "singular oracle system");
        if pivot != col {
            for k in 0..n {
                let tmp = a.at(col, k);
                *a.at_mut(col, k) = a.at(pivot, k);
                *a.at_mut(pivot, k) = tmp;
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a.at(row, col) / a.at(col, col);
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a.at(col, k);
                *a.at_mut(row, k) -= f * v;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for (k, xk) in x.iter().enumerate().skip(row + 1) {
            acc -= a.at(row, k) * xk;
        }
        x[row] = acc / a.at(row, row);
    }
    x
}

/// Least-squares polynomial fit of the given degree via its own normal
/// equations and LU solve. Returns coefficients lowest power first.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let terms = degree + 1;
    let mut a = DenseMatrix::zeros(terms, terms);
    let mut b = vec![0.0; terms];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut powers = vec![1.0; 2 * terms - 1];
        for k in 1..powers.len() {
            powers[k] = powers[k - 1] * x;
        }
        for r in 0..terms {
            for c in 0..terms {
                *a.at_mut(r, c) += powers[r + c];
            }
            b[r] += y * powers[r];
        }
    }
    lu_solve(a, b)
}

pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Composite trapezoid rule with `panels` subintervals.
pub fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut total = 0.5 * (f(lo) + f(hi));
    for i in 1..panels {
        total += f(lo + h * i as f64);
    }
    total * h
}

pub fn random_signal(rng: &mut impl Rng, width: usize, height: usize) -> Signal {
    let samples = (0..width * height)
        .map(|_| rng.gen_range(-64.0..320.0))
        .collect();
    Signal::new(width, height, samples, 255.0).unwrap()
}

pub fn random_image_signal(rng: &mut impl Rng, width: usize, height: usize) -> Signal {
    let samples = (0..width * height)
        .map(|_| rng.gen_range(0.0..255.0))
        .collect();
    Signal::new(width, height, samples, 255.0).unwrap()
}

/// Random odd-sized kernel with nonnegative weights normalized to unit sum.
pub fn random_unit_kernel(rng: &mut impl Rng, max_half: usize) -> Kernel {
    let rows = 2 * rng.gen_range(0..=max_half) + 1;
    let cols = 2 * rng.gen_range(0..=max_half) + 1;
    let mut weights: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Kernel::new(rows, cols, weights).unwrap()
}

/// Random probability vector of length `k` summing to 1.
pub fn random_probabilities(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}
