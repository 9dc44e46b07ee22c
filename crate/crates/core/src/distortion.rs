//! Expected reconstruction distortion over a degradation ensemble.

use thiserror::Error;

use crate::ensemble::DegradationEnsemble;
use crate::operators::OperatorError;
use crate::signal::{Signal, SignalError};

#[derive(Debug, Error)]
pub enum DistortionError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Probability-weighted mean-squared error of the displayed reconstructions:
/// `(1/N) * sum_k p_k * ||x - H_k v||^2`.
pub fn expected_distortion(
    x: &Signal,
    v: &Signal,
    ensemble: &DegradationEnsemble,
) -> Result<f64, DistortionError> {
    x.check_same_dimensions(v)?;
    let n = x.len() as f64;
    let mut total = 0.0;
    for entry in ensemble.entries() {
        let displayed = entry.operator.apply(v)?;
        let sq: f64 = x
            .samples()
            .iter()
            .zip(displayed.samples())
            .map(|(a, b)| {
                let d = a - b;
                d * d
            })
            .sum();
        total += entry.probability * sq;
    }
    Ok(total / n)
}

/// PSNR against the expected distortion: `10 * log10(P^2 / D)`.
///
/// Returns `f64::INFINITY` when the distortion is exactly zero.
pub fn expected_psnr(
    x: &Signal,
    v: &Signal,
    ensemble: &DegradationEnsemble,
) -> Result<f64, DistortionError> {
    let d = expected_distortion(x, v, ensemble)?;
    Ok(psnr_from_distortion(d, x.sample_scale()))
}

/// PSNR for an already-computed distortion value.
pub fn psnr_from_distortion(distortion: f64, sample_scale: f64) -> f64 {
    if distortion == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (sample_scale * sample_scale / distortion).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{gaussian_kernel, BlurOperator, BoundaryMode};

    fn three_blur_ensemble() -> DegradationEnsemble {
        let mk = |sigma| BlurOperator::new(gaussian_kernel(5, sigma).unwrap(), BoundaryMode::Periodic);
        DegradationEnsemble::from_pairs([(mk(0.6), 0.6), (mk(0.8), 0.3), (mk(1.0), 0.1)]).unwrap()
    }

    #[test]
    fn identity_ensemble_zero_distortion_when_equal() {
        let x = Signal::new(6, 6, (0..36).map(|i| i as f64).collect(), 255.0).unwrap();
        let e = DegradationEnsemble::identity(BoundaryMode::Periodic);
        assert_eq!(expected_distortion(&x, &x, &e).unwrap(), 0.0);
    }

    #[test]
    fn all_zero_signals_zero_distortion() {
        let z = Signal::zeros(8, 8);
        assert_eq!(expected_distortion(&z, &z, &three_blur_ensemble()).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let x = Signal::zeros(8, 8);
        let v = Signal::zeros(8, 9);
        assert!(matches!(
            expected_distortion(&x, &v, &three_blur_ensemble()),
            Err(DistortionError::Signal(SignalError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn single_operator_reduces_to_plain_mse() {
        let x = Signal::new(8, 8, (0..64).map(|i| (i % 7) as f64).collect(), 255.0).unwrap();
        let v = Signal::new(8, 8, (0..64).map(|i| (i % 5) as f64).collect(), 255.0).unwrap();
        let op = BlurOperator::new(gaussian_kernel(3, 0.9).unwrap(), BoundaryMode::Periodic);
        let e = DegradationEnsemble::from_pairs([(op.clone(), 1.0)]).unwrap();
        let d = expected_distortion(&x, &v, &e).unwrap();
        let hv = op.apply(&v).unwrap();
        let mse = x
            .samples()
            .iter()
            .zip(hv.samples())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / 64.0;
        assert!((d - mse).abs() <= 1e-15 * mse.max(1.0));
    }

    #[test]
    fn invariant_to_entry_ordering() {
        let x = Signal::new(8, 8, (0..64).map(|i| (i * 13 % 97) as f64).collect(), 255.0).unwrap();
        let v = Signal::new(8, 8, (0..64).map(|i| (i * 7 % 89) as f64).collect(), 255.0).unwrap();
        let mk = |sigma| BlurOperator::new(gaussian_kernel(5, sigma).unwrap(), BoundaryMode::Periodic);
        let fwd = DegradationEnsemble::from_pairs([(mk(0.6), 0.6), (mk(0.8), 0.3), (mk(1.0), 0.1)])
            .unwrap();
        let rev = DegradationEnsemble::from_pairs([(mk(1.0), 0.1), (mk(0.8), 0.3), (mk(0.6), 0.6)])
            .unwrap();
        let a = expected_distortion(&x, &v, &fwd).unwrap();
        let b = expected_distortion(&x, &v, &rev).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn psnr_analytic_values() {
        // D = P^2 gives 0 dB.
        assert!((psnr_from_distortion(255.0 * 255.0, 255.0) - 0.0).abs() < 1e-12);
        // P = 255, D = 0.255^2 gives exactly 60 dB.
        assert!((psnr_from_distortion(0.255 * 0.255, 255.0) - 60.0).abs() < 1e-12);
        // Zero distortion maps to the documented infinity sentinel.
        assert_eq!(psnr_from_distortion(0.0, 255.0), f64::INFINITY);
    }
}
