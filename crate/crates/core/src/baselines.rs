//! Comparison encoders: plain compression, single-display optimization, and
//! deconvolve-then-compress.

use thiserror::Error;

use crate::admm::{encode_for_network, AdmmConfig, AdmmError, AdmmTrace};
use crate::codec::{Codec, CodecError};
use crate::ensemble::DegradationEnsemble;
use crate::operators::{BlurOperator, BoundaryMode, Kernel, OperatorError};
use crate::signal::{Bitstream, Signal};
use crate::solver::{conjugate_gradient, EnsembleSpectrum, SolverError};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("reg_weight must be positive and finite, got {0}")]
    InvalidRegWeight(f64),
    #[error("degenerate deconvolution system (zero denominator at some frequency)")]
    DegenerateSystem,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Plain standard compression, no pre/post processing. Evaluation still
/// applies the ensemble degradation afterwards.
pub fn regular_encode(x: &Signal, codec: &dyn Codec, theta: u8) -> Result<Bitstream, CodecError> {
    codec.compress(x, theta)
}

/// The full encoder loop run against only the most probable display
/// operator (ties break to the lowest index).
pub fn single_display_encode(
    x: &Signal,
    ensemble: &DegradationEnsemble,
    codec: &dyn Codec,
    cfg: &AdmmConfig,
) -> Result<(Bitstream, AdmmTrace), AdmmError> {
    let reduced = ensemble.reduce_to_most_probable();
    encode_for_network(x, &reduced, codec, cfg)
}

/// Discrete 5-point Laplacian.
pub fn laplacian_kernel() -> Kernel {
    Kernel::new(3, 3, vec![0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0])
        .expect("laplacian kernel is valid")
}

/// Smoothness-regularized multi-operator deconvolution:
/// `argmin_w sum_k p_k ||x - H_k w||^2 + reg_weight ||L w||^2` with `L` the
/// periodic discrete Laplacian.
pub fn predeconv_signal(
    x: &Signal,
    ensemble: &DegradationEnsemble,
    reg_weight: f64,
) -> Result<Signal, BaselineError> {
    if reg_weight <= 0.0 || !reg_weight.is_finite() {
        return Err(BaselineError::InvalidRegWeight(reg_weight));
    }
    let laplacian = BlurOperator::new(laplacian_kernel(), BoundaryMode::Periodic);
    match ensemble.boundary() {
        BoundaryMode::Periodic => {
            let spectrum = EnsembleSpectrum::new(ensemble, x.width(), x.height())?;
            let l_hat = laplacian.transfer_function(x.width(), x.height())?;
            let x_hat = spectrum.fft().forward_real(x.samples());
            let rhs: Vec<_> = spectrum
                .sum_p_conj_h()
                .iter()
                .zip(&x_hat)
                .map(|(c, x)| c * x)
                .collect();
            for (i, v) in spectrum.sum_p_h2().iter().enumerate() {
                if v + reg_weight * l_hat[i].norm_sqr() <= 0.0 {
                    return Err(BaselineError::DegenerateSystem);
                }
            }
            let w_hat =
                spectrum.solve_with_regularizer(&rhs, |i| reg_weight * l_hat[i].norm_sqr());
            Ok(x.with_samples(spectrum.fft().inverse_to_real(w_hat)))
        }
        BoundaryMode::Symmetric => {
            // Normal equations via CG; the Laplacian stays periodic.
            let mut b = x.scale(0.0);
            for entry in ensemble.entries() {
                let htx = entry.operator.apply_adjoint(x)?;
                b = b.add(&htx.scale(entry.probability));
            }
            let apply_a = |w: &Signal| -> Result<Signal, SolverError> {
                let lw = laplacian.apply(w)?;
                let ltlw = laplacian.apply_adjoint(&lw)?;
                let mut out = ltlw.scale(reg_weight);
                for entry in ensemble.entries() {
                    let hw = entry.operator.apply(w)?;
                    let hthw = entry.operator.apply_adjoint(&hw)?;
                    out = out.add(&hthw.scale(entry.probability));
                }
                Ok(out)
            };
            let solution = conjugate_gradient(apply_a, &b, 1e-10, 4000)?;
            Ok(solution.signal)
        }
    }
}

/// Deconvolve-then-compress baseline: the pre-compensated signal is encoded
/// with the plain codec.
pub fn predeconv_encode(
    x: &Signal,
    ensemble: &DegradationEnsemble,
    codec: &dyn Codec,
    theta: u8,
    reg_weight: f64,
) -> Result<Bitstream, BaselineError> {
    let w = predeconv_signal(x, ensemble, reg_weight)?;
    Ok(codec.compress(&w, theta)?)
}
