//! Corpus-level codec behavior: rate trends, fixed points, determinism.

use netcomp_core::codec::{
    quantization_step, reference_compress, reference_decompress, Codec, ReferenceCodec,
};
use netcomp_core::corpus::synthetic_corpus;

#[test]
fn mean_bits_decrease_from_finest_to_coarsest_quality() {
    let corpus = synthetic_corpus(6, 32, 32);
    let mean_bits = |theta: u8| -> f64 {
        corpus
            .iter()
            .map(|(_, x)| reference_compress(x, theta).unwrap().bit_length() as f64)
            .sum::<f64>()
            / corpus.len() as f64
    };
    assert!(mean_bits(0) > mean_bits(51));
}

#[test]
fn mean_rate_is_monotone_in_quality_index() {
    let corpus = synthetic_corpus(6, 32, 32);
    let thetas = [0u8, 4, 10, 16, 22, 28, 34, 40, 46, 51];
    let mut previous = f64::INFINITY;
    for theta in thetas {
        let mean: f64 = corpus
            .iter()
            .map(|(_, x)| reference_compress(x, theta).unwrap().bit_length() as f64)
            .sum::<f64>()
            / corpus.len() as f64;
        assert!(
            mean <= previous,
            "mean bits grew from {previous} to {mean} at theta {theta}"
        );
        previous = mean;
    }
}

#[test]
fn round_trip_error_is_within_the_analytic_bound_on_corpus() {
    let corpus = synthetic_corpus(4, 24, 24);
    let amplification = netcomp_core::codec::dct::inverse_amplification();
    for (name, x) in &corpus {
        for theta in [0u8, 12, 30, 51] {
            let b = reference_compress(x, theta).unwrap();
            let v = reference_decompress(&b).unwrap();
            let bound = quantization_step(theta) / 2.0 * amplification + 1e-9;
            for (a, b) in x.samples().iter().zip(v.samples()) {
                assert!((a - b).abs() <= bound, "{name} at theta {theta}");
            }
        }
    }
}

#[test]
fn encode_decode_encode_is_a_fixed_point_on_corpus() {
    // Corpus dimensions are block-aligned, where the quantized transform is
    // an exact fixed point of the codec.
    let corpus = synthetic_corpus(6, 32, 32);
    for (name, x) in &corpus {
        for theta in [1u8, 11, 31] {
            let b1 = reference_compress(x, theta).unwrap();
            let v = reference_decompress(&b1).unwrap();
            let b2 = reference_compress(&v, theta).unwrap();
            assert_eq!(b1, b2, "{name} at theta {theta}");
        }
    }
}

#[test]
fn compression_is_deterministic_across_instances() {
    let corpus = synthetic_corpus(2, 32, 32);
    let a = ReferenceCodec::new();
    let b = ReferenceCodec::new();
    for (_, x) in &corpus {
        let ba = a.compress(x, 18).unwrap();
        let bb = b.compress(x, 18).unwrap();
        assert_eq!(ba, bb);
        assert_eq!(a.rate_of(&ba), ba.bit_length());
    }
}
