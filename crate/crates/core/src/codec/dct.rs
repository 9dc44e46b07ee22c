//! Orthonormal 8x8 DCT-II, applied separably on rows and columns.

use std::sync::OnceLock;

pub const BLOCK: usize = 8;
pub const BLOCK_AREA: usize = BLOCK * BLOCK;

/// Orthonormal DCT-II matrix: `C[u][n] = a(u) cos(pi (2n+1) u / 16)` with
/// `a(0) = sqrt(1/8)` and `a(u) = 1/2` otherwise. Its inverse is its
/// transpose.
fn basis() -> &'static [[f64; BLOCK]; BLOCK] {
    static BASIS: OnceLock<[[f64; BLOCK]; BLOCK]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; BLOCK]; BLOCK];
        for (u, row) in m.iter_mut().enumerate() {
            let a = if u == 0 {
                (1.0 / BLOCK as f64).sqrt()
            } else {
                (2.0 / BLOCK as f64).sqrt()
            };
            for (n, v) in row.iter_mut().enumerate() {
                *v = a * (std::f64::consts::PI * (2.0 * n as f64 + 1.0) * u as f64
                    / (2.0 * BLOCK as f64))
                    .cos();
            }
        }
        m
    })
}

/// Forward transform: `Y = C X C'`.
pub fn forward(block: &[f64; BLOCK_AREA]) -> [f64; BLOCK_AREA] {
    transform(block, false)
}

/// Inverse transform: `X = C' Y C`.
pub fn inverse(block: &[f64; BLOCK_AREA]) -> [f64; BLOCK_AREA] {
    transform(block, true)
}

fn transform(block: &[f64; BLOCK_AREA], inverse: bool) -> [f64; BLOCK_AREA] {
    let c = basis();
    let mut tmp = [0.0; BLOCK_AREA];
    // Rows: tmp = X C' (forward) or X C (inverse).
    for r in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for n in 0..BLOCK {
                let w = if inverse { c[n][u] } else { c[u][n] };
                acc += block[r * BLOCK + n] * w;
            }
            tmp[r * BLOCK + u] = acc;
        }
    }
    let mut out = [0.0; BLOCK_AREA];
    // Columns.
    for u in 0..BLOCK {
        for col in 0..BLOCK {
            let mut acc = 0.0;
            for n in 0..BLOCK {
                let w = if inverse { c[n][u] } else { c[u][n] };
                acc += tmp[n * BLOCK + col] * w;
            }
            out[u * BLOCK + col] = acc;
        }
    }
    out
}

/// Worst-case amplification from a coefficient-domain max-norm error to a
/// pixel-domain max-norm error: the squared maximum L1 row norm of the
/// inverse 1-D transform.
pub fn inverse_amplification() -> f64 {
    let c = basis();
    let max_row_l1 = (0..BLOCK)
        .map(|n| (0..BLOCK).map(|u| c[u][n].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    max_row_l1 * max_row_l1
}
