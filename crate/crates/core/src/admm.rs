//! The network-optimized encoder loop.
//!
//! Alternates the standard codec with the regularized deconvolution solve,
//! coupling them through a scaled dual variable. Each iteration compresses
//! the current deconvolution iterate, so the emitted stream stays decodable
//! by the unmodified standard decoder.

use std::fmt::Write as _;

use thiserror::Error;

use crate::codec::{Codec, CodecError};
use crate::distortion::psnr_from_distortion;
use crate::ensemble::DegradationEnsemble;
use crate::signal::{Bitstream, Signal};
use crate::solver::{z_update, SolverError, ZUpdateContext};

/// Scale of the default `beta_tilde(theta)` schedule; see
/// [`default_beta_tilde`]. Calibrated on the synthetic corpus so that runs at
/// high quality converge without the divergence guard firing.
pub const DEFAULT_BETA_SCALE: f64 = 0.03;

/// Default quality-dependent proximity weight: proportional to the squared
/// quantization step, `scale * 2^((theta - 4) / 3)`. Coarser quantization
/// tolerates larger per-iteration moves, so the proximity weight grows with
/// the step.
pub fn default_beta_tilde(theta: u8) -> f64 {
    DEFAULT_BETA_SCALE * 2f64.powf((theta as f64 - 4.0) / 3.0)
}

#[derive(Debug, Clone)]
pub struct AdmmConfig {
    /// Codec quality index.
    pub theta: u8,
    /// Proximity weight of the deconvolution subproblem; must be positive.
    pub beta_tilde: f64,
    /// Iteration cap.
    pub max_iterations: usize,
    /// Converged when `||v - z|| / max(||z||, tiny) < convergence_epsilon`.
    pub convergence_epsilon: f64,
    /// Diverged when the split residual grows by more than this factor over
    /// the previous iteration while exceeding the first-iteration residual.
    pub divergence_factor: f64,
}

impl AdmmConfig {
    pub fn new(theta: u8, beta_tilde: f64) -> Self {
        Self {
            theta,
            beta_tilde,
            max_iterations: 40,
            convergence_epsilon: 1e-3,
            divergence_factor: 2.0,
        }
    }

    /// Config with the default quality-dependent `beta_tilde` schedule.
    pub fn with_auto_beta(theta: u8) -> Self {
        Self::new(theta, default_beta_tilde(theta))
    }

    fn validate(&self) -> Result<(), AdmmError> {
        if self.max_iterations < 1 {
            return Err(AdmmError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.convergence_epsilon <= 0.0 || self.convergence_epsilon.is_nan() {
            return Err(AdmmError::InvalidConfig(
                "convergence_epsilon must be > 0".into(),
            ));
        }
        if self.divergence_factor <= 1.0 || self.divergence_factor.is_nan() {
            return Err(AdmmError::InvalidConfig(
                "divergence_factor must be > 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    MaxIterations,
    Converged,
    Diverged,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::MaxIterations => "max_iter",
            TerminationReason::Converged => "converged",
            TerminationReason::Diverged => "diverged",
        }
    }
}

/// Diagnostics for one iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    /// `||v - z||_2`, the disagreement between the two variable copies.
    pub split_residual: f64,
    /// `||z||_2`, the scale reference for the convergence test.
    pub z_norm: f64,
    /// Bit cost of this iteration's stream.
    pub bits: u64,
    /// Expected ensemble distortion of this iteration's decoded signal.
    pub expected_mse: f64,
}

/// Per-iteration diagnostics plus the reason the loop stopped.
#[derive(Debug, Clone)]
pub struct AdmmTrace {
    records: Vec<IterationRecord>,
    termination: TerminationReason,
    sample_scale: f64,
}

impl AdmmTrace {
    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn termination(&self) -> TerminationReason {
        self.termination
    }

    /// CSV with one row per iteration:
    /// `iteration,split_residual,bits,expected_mse,expected_psnr_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,split_residual,bits,expected_mse,expected_psnr_db\n");
        for (i, r) in self.records.iter().enumerate() {
            let psnr = psnr_from_distortion(r.expected_mse, self.sample_scale);
            let _ = writeln!(
                out,
                "{},{:.12e},{},{:.12e},{:.6}",
                i + 1,
                r.split_residual,
                r.bits,
                r.expected_mse,
                psnr
            );
        }
        out
    }
}

/// Outcome of the stopping rule applied to the records so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationDecision {
    Continue,
    Converged,
    Diverged,
}

/// Stopping rule. Convergence compares the latest split residual against the
/// latest iterate norm; divergence requires growth beyond
/// `divergence_factor` times the previous residual *and* past the
/// first-iteration residual.
pub fn termination_check(records: &[IterationRecord], cfg: &AdmmConfig) -> TerminationDecision {
    let Some(last) = records.last() else {
        return TerminationDecision::Continue;
    };
    let relative = last.split_residual / last.z_norm.max(1e-300);
    if relative < cfg.convergence_epsilon {
        return TerminationDecision::Converged;
    }
    if records.len() >= 2 {
        let prev = records[records.len() - 2].split_residual;
        let first = records[0].split_residual;
        if last.split_residual > cfg.divergence_factor * prev && last.split_residual > first {
            return TerminationDecision::Diverged;
        }
    }
    TerminationDecision::Continue
}

#[derive(Debug, Error)]
pub enum AdmmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("codec failed at iteration {}: {source}", records.len() + 1)]
    Codec {
        source: CodecError,
        records: Vec<IterationRecord>,
    },
    #[error("solver failed at iteration {}: {source}", records.len() + 1)]
    Solver {
        source: SolverError,
        records: Vec<IterationRecord>,
    },
}

impl AdmmError {
    /// Iteration records accumulated before the failure, if any.
    pub fn partial_records(&self) -> &[IterationRecord] {
        match self {
            AdmmError::Codec { records, .. } | AdmmError::Solver { records, .. } => records,
            AdmmError::InvalidConfig(_) => &[],
        }
    }
}

/// Runs the full encoder loop and returns the bitstream of the last completed
/// iteration together with the trace.
///
/// On divergence detection the stream of the iteration *before* the divergent
/// one is returned, so a known-bad iterate is never shipped.
pub fn encode_for_network(
    x: &Signal,
    ensemble: &DegradationEnsemble,
    codec: &dyn Codec,
    cfg: &AdmmConfig,
) -> Result<(Bitstream, AdmmTrace), AdmmError> {
    cfg.validate()?;
    let ctx = ZUpdateContext::new(ensemble, x, cfg.beta_tilde).map_err(|source| {
        AdmmError::Solver {
            source,
            records: Vec::new(),
        }
    })?;

    let mut z_hat = x.clone();
    let mut u = x.scale(0.0);
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut previous: Option<Bitstream> = None;

    for _t in 1..=cfg.max_iterations {
        let z_tilde = z_hat.sub(&u);
        let bitstream = codec.compress(&z_tilde, cfg.theta).map_err(|source| {
            AdmmError::Codec {
                source,
                records: records.clone(),
            }
        })?;
        let v_hat = codec.decompress(&bitstream).map_err(|source| AdmmError::Codec {
            source,
            records: records.clone(),
        })?;
        let v_tilde = v_hat.add(&u);
        z_hat = z_update(&ctx, &v_tilde).map_err(|source| AdmmError::Solver {
            source,
            records: records.clone(),
        })?;
        u = u.add(&v_hat.sub(&z_hat));

        let expected_mse = ctx.expected_distortion_of(&v_hat).map_err(|source| {
            AdmmError::Solver {
                source,
                records: records.clone(),
            }
        })?;
        records.push(IterationRecord {
            split_residual: v_hat.sub(&z_hat).norm(),
            z_norm: z_hat.norm(),
            bits: codec.rate_of(&bitstream),
            expected_mse,
        });

        match termination_check(&records, cfg) {
            TerminationDecision::Converged => {
                return Ok((
                    bitstream,
                    AdmmTrace {
                        records,
                        termination: TerminationReason::Converged,
                        sample_scale: x.sample_scale(),
                    },
                ));
            }
            TerminationDecision::Diverged => {
                let output = previous.expect("divergence requires a previous iteration");
                return Ok((
                    output,
                    AdmmTrace {
                        records,
                        termination: TerminationReason::Diverged,
                        sample_scale: x.sample_scale(),
                    },
                ));
            }
            TerminationDecision::Continue => previous = Some(bitstream),
        }
    }

    Ok((
        previous.expect("max_iterations >= 1 guarantees at least one iteration"),
        AdmmTrace {
            records,
            termination: TerminationReason::MaxIterations,
            sample_scale: x.sample_scale(),
        },
    ))
}
