//! Compression tuned for a network of displays.
//!
//! A compressed image is often rendered by one of several displays, each of
//! which degrades the decompressed signal — modeled here as linear blur
//! operators with known usage probabilities. This crate optimizes a standard
//! lossy codec's output for the *expected* displayed quality across that
//! ensemble: an operator-splitting loop alternates ordinary compression with
//! a multi-operator regularized deconvolution, so the emitted stream remains
//! decodable by the unmodified standard decoder while pre-compensating the
//! downstream blurs.
//!
//! The crate also ships the surrounding toolkit: a self-contained reference
//! transform codec (plus an adapter for external codec binaries), comparison
//! baselines, expected-PSNR evaluation, rate sweeps and Bjontegaard-delta
//! reporting, PGM image I/O, and a deterministic synthetic test corpus.

pub mod admm;
pub mod baselines;
pub mod codec;
pub mod corpus;
pub mod distortion;
pub mod ensemble;
pub mod eval;
pub mod fft;
pub mod operators;
pub mod pgm;
pub mod signal;
pub mod solver;
pub mod svg;

pub use admm::{
    default_beta_tilde, encode_for_network, termination_check, AdmmConfig, AdmmError, AdmmTrace,
    TerminationReason,
};
pub use codec::{Codec, CodecError, ReferenceCodec};
pub use distortion::{expected_distortion, expected_psnr};
pub use ensemble::{DegradationEnsemble, EnsembleEntry, EnsembleError};
pub use eval::{bd_psnr, high_rate_report, sweep, Method, RatePoint, RdCurve};
pub use operators::{gaussian_kernel, BlurOperator, BoundaryMode, Kernel};
pub use signal::{Bitstream, Signal};
pub use solver::{iterative_z_update, z_update, ZUpdateContext};
