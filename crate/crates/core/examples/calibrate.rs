//! Calibration sweep for the default beta_tilde schedule scale.
//!
//! Runs the full method comparison on the synthetic corpus for several scale
//! candidates and reports convergence statistics and Bjontegaard gains, so
//! the shipped default can be chosen from data.
//!
//! Usage: cargo run --release --example calibrate [-- <width> <count> <scales...>]

use std::time::Instant;

use netcomp_core::admm::{encode_for_network, AdmmConfig, TerminationReason};
use netcomp_core::baselines::predeconv_encode;
use netcomp_core::codec::{Codec, ReferenceCodec};
use netcomp_core::corpus::synthetic_corpus;
use netcomp_core::distortion::expected_psnr;
use netcomp_core::ensemble::DegradationEnsemble;
use netcomp_core::eval::{bd_psnr, RatePoint, RdCurve, HIGH_RATE_QPS};
use netcomp_core::operators::{gaussian_kernel, BlurOperator, BoundaryMode};
use netcomp_core::signal::Signal;

fn display_ensemble() -> DegradationEnsemble {
    let mk = |s| BlurOperator::new(gaussian_kernel(15, s).unwrap(), BoundaryMode::Periodic);
    DegradationEnsemble::from_pairs([(mk(0.6), 0.6), (mk(0.8), 0.3), (mk(1.0), 0.1)]).unwrap()
}

fn point(qp: u8, bits: u64, x: &Signal, v: &Signal, e: &DegradationEnsemble) -> RatePoint {
    RatePoint {
        qp,
        bpp: bits as f64 / x.len() as f64,
        psnr_db: expected_psnr(x, v, e).unwrap(),
    }
}

struct AdmmRun {
    curve: RdCurve,
    residual_ratios: Vec<f64>,
    diverged: usize,
    total_iterations: usize,
}

fn admm_curve(
    x: &Signal,
    encode_ensemble: &DegradationEnsemble,
    eval_ensemble: &DegradationEnsemble,
    codec: &dyn Codec,
    scale: f64,
    label: &str,
) -> AdmmRun {
    let mut points = Vec::new();
    let mut residual_ratios = Vec::new();
    let mut diverged = 0;
    let mut total_iterations = 0;
    for &qp in &HIGH_RATE_QPS {
        let beta = scale * 2f64.powf((qp as f64 - 4.0) / 3.0);
        let cfg = AdmmConfig::new(qp, beta);
        let (b, trace) = encode_for_network(x, encode_ensemble, codec, &cfg).unwrap();
        let v = codec.decompress(&b).unwrap();
        points.push(point(qp, b.bit_length(), x, &v, eval_ensemble));
        let first = trace.records()[0].split_residual;
        let last = trace.records().last().unwrap().split_residual;
        residual_ratios.push(last / first.max(1e-300));
        if trace.termination() == TerminationReason::Diverged {
            diverged += 1;
        }
        total_iterations += trace.iterations();
    }
    AdmmRun {
        curve: RdCurve::new(label, points).unwrap(),
        residual_ratios,
        diverged,
        total_iterations,
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let width: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(128);
    let count: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    let scales: Vec<f64> = if args.len() > 2 {
        args[2..].iter().map(|s| s.parse().unwrap()).collect()
    } else {
        vec![0.125, 0.25, 0.5, 1.0, 2.0]
    };
    let reg_weights = [3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1];

    let corpus = synthetic_corpus(count, width, width);
    let ensemble = display_ensemble();
    let codec = ReferenceCodec::new();

    // Baselines are scale-independent; compute once per image.
    let start = Instant::now();
    let mut regular_curves = Vec::new();
    let mut predeconv_curves = Vec::new();
    for (_, x) in &corpus {
        let mut reg_points = Vec::new();
        let mut pre_points = Vec::new();
        for &qp in &HIGH_RATE_QPS {
            let b = codec.compress(x, qp).unwrap();
            let v = codec.decompress(&b).unwrap();
            reg_points.push(point(qp, b.bit_length(), x, &v, &ensemble));

            let mut best: Option<RatePoint> = None;
            for &reg in &reg_weights {
                let b = predeconv_encode(x, &ensemble, &codec, qp, reg).unwrap();
                let v = codec.decompress(&b).unwrap();
                let p = point(qp, b.bit_length(), x, &v, &ensemble);
                if best.as_ref().is_none_or(|cur| p.psnr_db > cur.psnr_db) {
                    best = Some(p);
                }
            }
            pre_points.push(best.unwrap());
        }
        regular_curves.push(RdCurve::new("regular", reg_points).unwrap());
        predeconv_curves.push(RdCurve::new("predeconv", pre_points).unwrap());
    }
    eprintln!(
        "baselines for {} images ({}x{}) took {:.1}s",
        corpus.len(),
        width,
        width,
        start.elapsed().as_secs_f64()
    );

    println!(
        "{:>7} | {:>12} {:>12} {:>12} | {:>9} {:>9} {:>9} | {:>5} {:>6} | {:>8}",
        "scale",
        "bd_reg(min)",
        "bd_pre(min)",
        "bd_sgl(min)",
        "reg>0",
        "pre>=0",
        "sgl>=0",
        "div",
        "res<5%",
        "time_s"
    );
    for &scale in &scales {
        let start = Instant::now();
        let mut bd_reg = Vec::new();
        let mut bd_pre = Vec::new();
        let mut bd_sgl = Vec::new();
        let mut diverged = 0;
        let mut ratios = Vec::new();
        let mut iterations = 0;
        for (i, (_, x)) in corpus.iter().enumerate() {
            let proposed = admm_curve(x, &ensemble, &ensemble, &codec, scale, "proposed");
            let single_ens = ensemble.reduce_to_most_probable();
            let single = admm_curve(x, &single_ens, &ensemble, &codec, scale, "single");
            bd_reg.push(bd_psnr(&regular_curves[i], &proposed.curve, None).unwrap());
            bd_pre.push(bd_psnr(&predeconv_curves[i], &proposed.curve, None).unwrap());
            bd_sgl.push(bd_psnr(&single.curve, &proposed.curve, None).unwrap());
            diverged += proposed.diverged;
            ratios.extend(proposed.residual_ratios);
            iterations += proposed.total_iterations + single.total_iterations;
        }
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let count_ok = |v: &[f64], thr: f64| v.iter().filter(|&&g| g >= thr).count();
        let res_ok = ratios.iter().filter(|&&r| r < 0.05).count();
        println!(
            "{:>7.3} | {:>12.3} {:>12.3} {:>12.3} | {:>6}/{:<2} {:>6}/{:<2} {:>6}/{:<2} | {:>5} {:>3}/{:<3} | {:>7.1}s  (iters {})",
            scale,
            min(&bd_reg),
            min(&bd_pre),
            min(&bd_sgl),
            bd_reg.iter().filter(|&&g| g > 0.0).count(),
            corpus.len(),
            count_ok(&bd_pre, 0.0),
            corpus.len(),
            count_ok(&bd_sgl, 0.0),
            corpus.len(),
            diverged,
            res_ok,
            ratios.len(),
            start.elapsed().as_secs_f64(),
            iterations,
        );
    }
}
