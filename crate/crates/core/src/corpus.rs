//! Deterministic synthetic grayscale test images.
//!
//! The generator mixes multi-scale noise, hard-edged shapes, gratings and
//! thin strokes so the corpus spans smooth, textured and edge-dominated
//! material. Images are quantized to integer 8-bit levels like real sources.
//! Everything is seeded, so test runs and benchmarks are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::signal::{Signal, DEFAULT_SAMPLE_SCALE};

type Recipe = fn(&mut ChaCha8Rng, usize, usize) -> Vec<f64>;

const RECIPES: [(&str, Recipe); 6] = [
    ("clouds", clouds_image),
    ("disks", disks_image),
    ("boxes", boxes_image),
    ("gratings", gratings_image),
    ("rings", rings_image),
    ("strokes", strokes_image),
];

/// Generates `count` deterministic images of the given size, cycling through
/// the scene recipes with fresh seeds.
pub fn synthetic_corpus(count: usize, width: usize, height: usize) -> Vec<(String, Signal)> {
    (0..count)
        .map(|i| {
            let (name, build) = RECIPES[i % RECIPES.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(0x6e6574636f6d70 ^ (i as u64 * 0x9e3779b9));
            let mut buf = build(&mut rng, width, height);
            quantize(&mut buf);
            (
                format!("{name}_{i:02}"),
                Signal::new(width, height, buf, DEFAULT_SAMPLE_SCALE)
                    .expect("generated buffer is valid"),
            )
        })
        .collect()
}

/// Clamp to [0, 255] and round to integer levels, like an 8-bit capture.
fn quantize(buf: &mut [f64]) {
    for v in buf.iter_mut() {
        *v = v.clamp(0.0, 255.0).round();
    }
}

/// Multi-octave value noise with a roughly 1/f amplitude falloff.
fn clouds(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; width * height];
    let mut amplitude = 1.0;
    let mut cells = 4usize;
    let mut total_amp = 0.0;
    while cells <= width.max(height) {
        let grid_w = cells + 2;
        let grid_h = cells + 2;
        let grid: Vec<f64> = (0..grid_w * grid_h).map(|_| rng.gen::<f64>()).collect();
        for y in 0..height {
            let gy = y as f64 / height as f64 * cells as f64;
            let y0 = gy.floor() as usize;
            let fy = gy - y0 as f64;
            for x in 0..width {
                let gx = x as f64 / width as f64 * cells as f64;
                let x0 = gx.floor() as usize;
                let fx = gx - x0 as f64;
                let g = |ix: usize, iy: usize| grid[iy * grid_w + ix];
                let v = g(x0, y0) * (1.0 - fx) * (1.0 - fy)
                    + g(x0 + 1, y0) * fx * (1.0 - fy)
                    + g(x0, y0 + 1) * (1.0 - fx) * fy
                    + g(x0 + 1, y0 + 1) * fx * fy;
                out[y * width + x] += amplitude * v;
            }
        }
        total_amp += amplitude;
        amplitude *= 0.55;
        cells *= 2;
    }
    for v in out.iter_mut() {
        *v /= total_amp;
    }
    out
}

fn clouds_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Vec<f64> {
    let mut buf = clouds(rng, width, height);
    // Stretch contrast to use most of the 8-bit range.
    let lo = buf.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in buf.iter_mut() {
        *v = (*v - lo) / (hi - lo) * 235.0 + 10.0;
    }
    buf
}

fn disks_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Vec<f64> {
    let mut buf = clouds_image(rng, width, height);
    for v in buf.iter_mut() {
        *v = 0.4 * *v + 76.0;
    }
    let n = 10 + rng.gen_range(0..6);
    for _ in 0..n {
        let cx = rng.gen_range(0.0..width as f64);
        let cy = rng.gen_range(0.0..height as f64);
        let r = rng.gen_range(width as f64 / 24.0..width as f64 / 5.0);
        let level = rng.gen_range(10.0..245.0);
        for y in 0..height {
            for x in 0..width {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                if dx * dx + dy * dy <= r * r {
                    buf[y * width + x] = level;
                }
            }
        }
    }
    buf
}

fn boxes_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Vec<f64> {
    let mut buf = vec![128.0f64; width * height];
    let n = 14 + rng.gen_range(0..8);
    for _ in 0..n {
        let x0 = rng.gen_range(0..width);
        let y0 = rng.gen_range(0..height);
        let bw = rng.gen_range(width / 16..width / 2).max(2);
        let bh = rng.gen_range(height / 16..height / 2).max(2);
        let level = rng.gen_range(5.0..250.0);
        for y in y0..(y0 + bh).min(height) {
            for x in x0..(x0 + bw).min(width) {
                buf[y * width + x] = level;
            }
        }
    }
    // Light texture so flat areas still carry detail.
    let tex = clouds(rng, width, height);
    for (v, t) in buf.iter_mut().zip(&tex) {
        *v += (t - 0.5) * 30.0;
    }
    buf
}

fn gratings_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Vec<f64> {
    let mut buf = vec![128.0f64; width * height];
    for _ in 0..3 {
        let angle = rng.gen_range(0.0..std::f64::consts::PI);
        let freq = rng.gen_range(0.06..0.45);
        let amp = rng.gen_range(18.0..45.0);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = angle.sin_cos();
        for y in 0..height {
            for x in 0..width {
                let u = c * x as f64 + s * y as f64;
                buf[y * width + x] += amp * (freq * u * std::f64::consts::TAU + phase).sin();
            }
        }
    }
    buf
}

fn rings_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Vec<f64> {
    let mut buf = vec![0.0f64; width * height];
    let centers: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                rng.gen_range(4.0..14.0),
            )
        })
        .collect();
    for y in 0..height {
        for x in 0..width {
            let mut v = 0.0;
            for &(cx, cy, period) in &centers {
                let r = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                v += (r / period * std::f64::consts::TAU).sin();
            }
            buf[y * width + x] = 128.0 + 40.0 * v;
        }
    }
    buf
}

fn strokes_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Vec<f64> {
    let mut buf = clouds_image(rng, width, height);
    for v in buf.iter_mut() {
        *v = 0.3 * *v + 140.0;
    }
    let n = 60 + rng.gen_range(0..40);
    for _ in 0..n {
        let x0 = rng.gen_range(0.0..width as f64);
        let y0 = rng.gen_range(0.0..height as f64);
        let len = rng.gen_range(3.0..width as f64 / 4.0);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let level = if rng.gen_bool(0.7) {
            rng.gen_range(0.0..60.0)
        } else {
            rng.gen_range(200.0..255.0)
        };
        let (s, c) = angle.sin_cos();
        let steps = (len * 2.0) as usize;
        for i in 0..=steps {
            let t = i as f64 / 2.0;
            let x = (x0 + c * t).round();
            let y = (y0 + s * t).round();
            if x >= 0.0 && y >= 0.0 && (x as usize) < width && (y as usize) < height {
                buf[y as usize * width + x as usize] = level;
            }
        }
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        let a = synthetic_corpus(3, 32, 32);
        let b = synthetic_corpus(3, 32, 32);
        for ((name_a, img_a), (name_b, img_b)) in a.iter().zip(&b) {
            assert_eq!(name_a, name_b);
            assert_eq!(img_a.samples(), img_b.samples());
        }
    }

    #[test]
    fn images_are_8_bit_valued() {
        for (_, img) in synthetic_corpus(6, 24, 24) {
            for &v in img.samples() {
                assert!((0.0..=255.0).contains(&v));
                assert_eq!(v, v.round());
            }
        }
    }

    #[test]
    fn names_are_unique() {
        let corpus = synthetic_corpus(12, 16, 16);
        let mut names: Vec<_> = corpus.iter().map(|(n, _)| n.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 12);
    }
}
