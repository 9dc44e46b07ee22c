//! Rate sweeps, PSNR-bitrate curves, and Bjontegaard-delta comparisons.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::admm::{encode_for_network, AdmmConfig};
use crate::baselines::{predeconv_encode, single_display_encode};
use crate::codec::Codec;
use crate::distortion::expected_psnr;
use crate::ensemble::DegradationEnsemble;
use crate::signal::Signal;

/// Minimum curve size for a cubic Bjontegaard fit.
pub const MIN_BD_POINTS: usize = 4;

/// The high-rate quality indices used by the comparison report.
pub const HIGH_RATE_QPS: [u8; 4] = [1, 6, 11, 16];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("qp list is empty")]
    EmptyQpList,
    #[error("curve {label:?} has {points} usable points, need at least {needed}")]
    CurveTooSmall {
        label: String,
        points: usize,
        needed: usize,
    },
    #[error("curve {label:?} has non-finite rate or PSNR")]
    NonFinitePoint { label: String },
    #[error("curve {label:?} has duplicate rates after sorting")]
    DuplicateRates { label: String },
    #[error("curves do not overlap in log-rate")]
    NoOverlap,
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
}

/// One measured operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub qp: u8,
    pub bpp: f64,
    pub psnr_db: f64,
}

/// A PSNR-bitrate curve, sorted by rate ascending with strictly increasing
/// rates and finite values.
#[derive(Debug, Clone)]
pub struct RdCurve {
    label: String,
    points: Vec<RatePoint>,
}

impl RdCurve {
    pub fn new(label: impl Into<String>, mut points: Vec<RatePoint>) -> Result<Self, EvalError> {
        let label = label.into();
        if points.is_empty() {
            return Err(EvalError::CurveTooSmall {
                label,
                points: 0,
                needed: 1,
            });
        }
        if points
            .iter()
            .any(|p| !p.bpp.is_finite() || !p.psnr_db.is_finite() || p.bpp <= 0.0)
        {
            return Err(EvalError::NonFinitePoint { label });
        }
        points.sort_by(|a, b| a.bpp.total_cmp(&b.bpp));
        if points.windows(2).any(|w| w[0].bpp == w[1].bpp) {
            return Err(EvalError::DuplicateRates { label });
        }
        Ok(Self { label, points })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[RatePoint] {
        &self.points
    }

    fn log_rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.bpp.log10()).collect()
    }

    /// CSV rows `method,qp,bpp,psnr_db` (no header).
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "{},{},{:.8},{:.6}", self.label, p.qp, p.bpp, p.psnr_db);
        }
        out
    }
}

/// Serializes curves as CSV with header `method,qp,bpp,psnr_db`.
pub fn curves_to_csv(curves: &[RdCurve]) -> String {
    let mut out = String::from("method,qp,bpp,psnr_db\n");
    for c in curves {
        out.push_str(&c.csv_rows());
    }
    out
}

/// Loop parameters shared by the proposed and single-display methods.
#[derive(Debug, Clone)]
pub struct AdmmSettings {
    /// `None` selects the default quality-dependent schedule.
    pub beta_tilde: Option<f64>,
    pub max_iterations: usize,
    pub convergence_epsilon: f64,
    pub divergence_factor: f64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        let template = AdmmConfig::with_auto_beta(0);
        Self {
            beta_tilde: None,
            max_iterations: template.max_iterations,
            convergence_epsilon: template.convergence_epsilon,
            divergence_factor: template.divergence_factor,
        }
    }
}

impl AdmmSettings {
    pub fn config_for(&self, theta: u8) -> AdmmConfig {
        let mut cfg = match self.beta_tilde {
            Some(b) => AdmmConfig::new(theta, b),
            None => AdmmConfig::with_auto_beta(theta),
        };
        cfg.max_iterations = self.max_iterations;
        cfg.convergence_epsilon = self.convergence_epsilon;
        cfg.divergence_factor = self.divergence_factor;
        cfg
    }
}

/// Regularization weights tried per rate point; the best expected-PSNR one
/// is kept, which favors the baseline.
#[derive(Debug, Clone)]
pub struct PredeconvSettings {
    pub reg_weights: Vec<f64>,
}

impl Default for PredeconvSettings {
    fn default() -> Self {
        Self {
            reg_weights: vec![3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1],
        }
    }
}

/// An encoding method under evaluation.
#[derive(Debug, Clone)]
pub enum Method {
    Regular,
    Proposed(AdmmSettings),
    SingleDisplay(AdmmSettings),
    Predeconv(PredeconvSettings),
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Regular => "regular",
            Method::Proposed(_) => "proposed",
            Method::SingleDisplay(_) => "single",
            Method::Predeconv(_) => "predeconv",
        }
    }
}

/// A rate point that could not be measured, with the reason.
#[derive(Debug, Clone)]
pub struct SkippedPoint {
    pub qp: u8,
    pub reason: String,
}

/// Curve plus any skipped points.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub curve: RdCurve,
    pub skipped: Vec<SkippedPoint>,
}

fn encode_point(
    x: &Signal,
    ensemble: &DegradationEnsemble,
    method: &Method,
    codec: &dyn Codec,
    qp: u8,
) -> Result<(u64, Signal), String> {
    match method {
        Method::Regular => {
            let b = codec.compress(x, qp).map_err(|e| e.to_string())?;
            let v = codec.decompress(&b).map_err(|e| e.to_string())?;
            Ok((codec.rate_of(&b), v))
        }
        Method::Proposed(settings) => {
            let cfg = settings.config_for(qp);
            let (b, _) =
                encode_for_network(x, ensemble, codec, &cfg).map_err(|e| e.to_string())?;
            let v = codec.decompress(&b).map_err(|e| e.to_string())?;
            Ok((codec.rate_of(&b), v))
        }
        Method::SingleDisplay(settings) => {
            let cfg = settings.config_for(qp);
            let (b, _) =
                single_display_encode(x, ensemble, codec, &cfg).map_err(|e| e.to_string())?;
            let v = codec.decompress(&b).map_err(|e| e.to_string())?;
            Ok((codec.rate_of(&b), v))
        }
        Method::Predeconv(settings) => {
            let mut best: Option<(f64, u64, Signal)> = None;
            let mut last_err = String::from("no reg_weight candidates");
            for &reg in &settings.reg_weights {
                match predeconv_encode(x, ensemble, codec, qp, reg)
                    .map_err(|e| e.to_string())
                    .and_then(|b| {
                        let v = codec.decompress(&b).map_err(|e| e.to_string())?;
                        let psnr = expected_psnr(x, &v, ensemble).map_err(|e| e.to_string())?;
                        Ok((psnr, codec.rate_of(&b), v))
                    }) {
                    Ok(candidate) => {
                        if best.as_ref().is_none_or(|b| candidate.0 > b.0) {
                            best = Some(candidate);
                        }
                    }
                    Err(e) => last_err = e,
                }
            }
            best.map(|(_, bits, v)| (bits, v)).ok_or(last_err)
        }
    }
}

/// Measures one `(bpp, expected PSNR)` point per quality index. PSNR is
/// always computed against the full ensemble, whatever the method optimized
/// for. Failed points are recorded and skipped; fewer than
/// [`MIN_BD_POINTS`] survivors is an error.
pub fn sweep(
    x: &Signal,
    ensemble: &DegradationEnsemble,
    method: &Method,
    codec: &dyn Codec,
    qps: &[u8],
) -> Result<SweepResult, EvalError> {
    if qps.is_empty() {
        return Err(EvalError::EmptyQpList);
    }
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &qp in qps {
        match encode_point(x, ensemble, method, codec, qp) {
            Ok((bits, v)) => match expected_psnr(x, &v, ensemble) {
                Ok(psnr_db) => points.push(RatePoint {
                    qp,
                    bpp: bits as f64 / x.len() as f64,
                    psnr_db,
                }),
                Err(e) => skipped.push(SkippedPoint {
                    qp,
                    reason: e.to_string(),
                }),
            },
            Err(reason) => skipped.push(SkippedPoint { qp, reason }),
        }
    }
    // Identical rates at different quality indices cannot happen with a sane
    // codec, but keep the better point rather than fail the whole sweep.
    points.sort_by(|a, b| a.bpp.total_cmp(&b.bpp).then(b.psnr_db.total_cmp(&a.psnr_db)));
    points.dedup_by(|next, kept| {
        if next.bpp == kept.bpp {
            skipped.push(SkippedPoint {
                qp: next.qp,
                reason: "duplicate rate".into(),
            });
            true
        } else {
            false
        }
    });
    if points.len() < MIN_BD_POINTS {
        return Err(EvalError::CurveTooSmall {
            label: method.label().to_string(),
            points: points.len(),
            needed: MIN_BD_POINTS,
        });
    }
    Ok(SweepResult {
        curve: RdCurve::new(method.label(), points)?,
        skipped,
    })
}

/// Cubic polynomial in a centered abscissa, for numerically stable fits.
#[derive(Debug, Clone, Copy)]
struct CenteredCubic {
    center: f64,
    coeffs: [f64; 4],
}

impl CenteredCubic {
    fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let anti = |x: f64| {
            let t = x - self.center;
            let [c0, c1, c2, c3] = self.coeffs;
            ((c3 / 4.0 * t + c2 / 3.0) * t + c1 / 2.0) * t * t + c0 * t
        };
        anti(hi) - anti(lo)
    }

    #[cfg(test)]
    fn eval(&self, x: f64) -> f64 {
        let t = x - self.center;
        let [c0, c1, c2, c3] = self.coeffs;
        ((c3 * t + c2) * t + c1) * t + c0
    }
}

fn fit_cubic(xs: &[f64], ys: &[f64]) -> Result<CenteredCubic, EvalError> {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < MIN_BD_POINTS {
        return Err(EvalError::IllConditioned(format!(
            "{} points, cubic fit needs {MIN_BD_POINTS}",
            xs.len()
        )));
    }
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if (xs[i] - xs[j]).abs() < 1e-9 {
                return Err(EvalError::IllConditioned(format!(
                    "near-duplicate abscissae {} and {}",
                    xs[i], xs[j]
                )));
            }
        }
    }
    let center = xs.iter().sum::<f64>() / xs.len() as f64;
    let ts: Vec<f64> = xs.iter().map(|x| x - center).collect();
    // Normal equations for least squares on (1, t, t^2, t^3).
    let mut moments = [0.0f64; 7];
    let mut rhs = [0.0f64; 4];
    for (t, y) in ts.iter().zip(ys) {
        let mut p = 1.0;
        for (k, m) in moments.iter_mut().enumerate() {
            *m += p;
            if k < 4 {
                rhs[k] += y * p;
            }
            p *= t;
        }
    }
    let mut a = [[0.0f64; 5]; 4];
    for (r, row) in a.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().take(4).enumerate() {
            *cell = moments[r + c];
        }
        row[4] = rhs[r];
    }
    let coeffs = solve4(&mut a)?;
    Ok(CenteredCubic { center, coeffs })
}

/// Gaussian elimination with partial pivoting on a 4x5 augmented system.
fn solve4(a: &mut [[f64; 5]; 4]) -> Result<[f64; 4], EvalError> {
    let scale = a
        .iter()
        .flat_map(|row| row[..4].iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max);
    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() <= 1e-12 * scale.max(1.0) {
            return Err(EvalError::IllConditioned("singular normal equations".into()));
        }
        a.swap(col, pivot_row);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            let pivot = a[col];
            for (cell, p) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *cell -= f * p;
            }
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut acc = a[row][4];
        for k in row + 1..4 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Average vertical gap between two PSNR-bitrate curves: cubic fits of PSNR
/// over log10(rate), integrated over the overlapping log-rate interval (or
/// `rate_range`, given in bits per pixel) and divided by its length.
/// Positive means `test` sits above `reference`.
pub fn bd_psnr(
    reference: &RdCurve,
    test: &RdCurve,
    rate_range: Option<(f64, f64)>,
) -> Result<f64, EvalError> {
    for curve in [reference, test] {
        if curve.points.len() < MIN_BD_POINTS {
            return Err(EvalError::CurveTooSmall {
                label: curve.label.clone(),
                points: curve.points.len(),
                needed: MIN_BD_POINTS,
            });
        }
    }
    let ref_logs = reference.log_rates();
    let test_logs = test.log_rates();
    let ref_fit = fit_cubic(&ref_logs, &psnrs(reference))?;
    let test_fit = fit_cubic(&test_logs, &psnrs(test))?;

    let (lo, hi) = match rate_range {
        Some((lo_bpp, hi_bpp)) => {
            if !(lo_bpp > 0.0 && hi_bpp > lo_bpp) {
                return Err(EvalError::NoOverlap);
            }
            (lo_bpp.log10(), hi_bpp.log10())
        }
        None => {
            let lo = min_of(&ref_logs).max(min_of(&test_logs));
            let hi = max_of(&ref_logs).min(max_of(&test_logs));
            (lo, hi)
        }
    };
    if hi <= lo {
        return Err(EvalError::NoOverlap);
    }
    Ok((test_fit.integrate(lo, hi) - ref_fit.integrate(lo, hi)) / (hi - lo))
}

fn psnrs(curve: &RdCurve) -> Vec<f64> {
    curve.points.iter().map(|p| p.psnr_db).collect()
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Report configuration: quality indices plus per-method settings.
#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub qps: Vec<u8>,
    pub admm: AdmmSettings,
    pub predeconv: PredeconvSettings,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            qps: HIGH_RATE_QPS.to_vec(),
            admm: AdmmSettings::default(),
            predeconv: PredeconvSettings::default(),
        }
    }
}

/// One comparison row: Bjontegaard gains of the proposed method over each
/// baseline. Missing cells carry the failure reason instead.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub image: String,
    pub gain_vs_regular: Result<f64, String>,
    pub gain_vs_predeconv: Result<f64, String>,
    pub gain_vs_single: Result<f64, String>,
    /// Curves measured for this image, for plotting and curve CSVs.
    pub curves: Vec<RdCurve>,
}

/// Per-image BD-PSNR table over the high-rate quality indices.
#[derive(Debug, Clone)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    /// CSV with header `image,gain_vs_regular,gain_vs_predeconv,gain_vs_single`.
    /// Missing cells are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("image,gain_vs_regular,gain_vs_predeconv,gain_vs_single\n");
        for row in &self.rows {
            let cell = |r: &Result<f64, String>| match r {
                Ok(v) => format!("{v:.4}"),
                Err(_) => String::new(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{}",
                row.image,
                cell(&row.gain_vs_regular),
                cell(&row.gain_vs_predeconv),
                cell(&row.gain_vs_single)
            );
        }
        out
    }
}

/// Builds the comparison report for a corpus. Images are processed in
/// parallel; output order follows the input order.
pub fn high_rate_report(
    corpus: &[(String, Signal)],
    ensemble: &DegradationEnsemble,
    codec: &dyn Codec,
    config: &ReportConfig,
) -> ReportTable {
    let rows = corpus
        .par_iter()
        .map(|(name, x)| report_row(name, x, ensemble, codec, config))
        .collect();
    ReportTable { rows }
}

fn report_row(
    name: &str,
    x: &Signal,
    ensemble: &DegradationEnsemble,
    codec: &dyn Codec,
    config: &ReportConfig,
) -> ReportRow {
    let run = |method: Method| {
        sweep(x, ensemble, &method, codec, &config.qps).map_err(|e| e.to_string())
    };
    let proposed = run(Method::Proposed(config.admm.clone()));
    let regular = run(Method::Regular);
    let predeconv = run(Method::Predeconv(config.predeconv.clone()));
    let single = run(Method::SingleDisplay(config.admm.clone()));

    let gain = |baseline: &Result<SweepResult, String>| -> Result<f64, String> {
        let p = proposed.as_ref().map_err(Clone::clone)?;
        let b = baseline.as_ref().map_err(Clone::clone)?;
        bd_psnr(&b.curve, &p.curve, None).map_err(|e| e.to_string())
    };

    let gain_vs_regular = gain(&regular);
    let gain_vs_predeconv = gain(&predeconv);
    let gain_vs_single = gain(&single);
    let curves = [proposed, regular, predeconv, single]
        .into_iter()
        .filter_map(|r| r.ok().map(|s| s.curve))
        .collect();
    ReportRow {
        image: name.to_string(),
        gain_vs_regular,
        gain_vs_predeconv,
        gain_vs_single,
        curves,
    }
}
