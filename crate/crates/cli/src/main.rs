//! Command-line front end: encode, decode, rate sweeps, and the comparison
//! report.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netcomp_core::admm::{default_beta_tilde, encode_for_network, AdmmConfig, AdmmTrace};
use netcomp_core::baselines::{predeconv_encode, regular_encode, single_display_encode};
use netcomp_core::codec::external::ExternalCodec;
use netcomp_core::codec::{Codec, ReferenceCodec, THETA_MAX};
use netcomp_core::distortion::expected_psnr;
use netcomp_core::ensemble::DegradationEnsemble;
use netcomp_core::eval::{
    curves_to_csv, high_rate_report, sweep, AdmmSettings, Method, PredeconvSettings, ReportConfig,
    HIGH_RATE_QPS,
};
use netcomp_core::pgm;
use netcomp_core::signal::{Bitstream, Signal};
use netcomp_core::svg::rd_chart;

use config::ToolkitConfig;

/// Nine quality indices evenly spaced over the investigated range; the
/// default sweep schedule.
const SWEEP_QPS: [u8; 9] = [1, 6, 11, 16, 21, 26, 31, 36, 41];

#[derive(Parser)]
#[command(
    name = "netcomp",
    version,
    about = "Lossy image compression optimized for an ensemble of display blurs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a PGM image for a display ensemble.
    Encode(EncodeArgs),
    /// Decompress a bitstream to a PGM image.
    Decode(DecodeArgs),
    /// Measure PSNR-bitrate curves for one or more methods over a corpus.
    Sweep(SweepArgs),
    /// Produce the per-image BD-PSNR comparison report over a corpus.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Proposed,
    Regular,
    Single,
    Predeconv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecArg {
    Reference,
    External,
}

/// `auto` (quality-dependent default) or an explicit positive value.
#[derive(Clone, Copy, Debug)]
enum BetaTildeArg {
    Auto,
    Fixed(f64),
}

impl FromStr for BetaTildeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BetaTildeArg::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("expected 'auto' or a number, got {s:?}"))?;
        if v > 0.0 && v.is_finite() {
            Ok(BetaTildeArg::Fixed(v))
        } else {
            Err(format!("beta-tilde must be positive, got {v}"))
        }
    }
}

impl BetaTildeArg {
    fn resolve(self, theta: u8) -> f64 {
        match self {
            BetaTildeArg::Auto => default_beta_tilde(theta),
            BetaTildeArg::Fixed(v) => v,
        }
    }

    fn fixed(self) -> Option<f64> {
        match self {
            BetaTildeArg::Auto => None,
            BetaTildeArg::Fixed(v) => Some(v),
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    /// Input image (binary PGM).
    #[arg(long)]
    input: PathBuf,
    /// Output bitstream file.
    #[arg(long)]
    output: PathBuf,
    /// Toolkit config with the display ensemble.
    #[arg(long)]
    ensemble: PathBuf,
    /// Codec quality index.
    #[arg(long, value_parser = clap::value_parser!(u8).range(..=THETA_MAX as i64))]
    qp: u8,
    /// Proximity weight: 'auto' or a positive number.
    #[arg(long, default_value = "auto")]
    beta_tilde: BetaTildeArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Proposed)]
    method: MethodArg,
    /// Iteration cap for proposed/single.
    #[arg(long, default_value_t = 40)]
    max_iters: usize,
    /// Write the per-iteration trace CSV here (proposed/single only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Regularization weight for the predeconv method.
    #[arg(long, default_value_t = 0.01)]
    reg_weight: f64,
    #[arg(long, value_enum, default_value_t = CodecArg::Reference)]
    codec: CodecArg,
}

#[derive(Args)]
struct DecodeArgs {
    /// Input bitstream file.
    #[arg(long)]
    input: PathBuf,
    /// Output image (binary PGM).
    #[arg(long)]
    output: PathBuf,
    /// Also apply the k-th display operator (1-based) before export.
    #[arg(long)]
    display: Option<usize>,
    /// Toolkit config; required with --display.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CodecArg::Reference)]
    codec: CodecArg,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory of .pgm images.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ensemble: PathBuf,
    /// Quality indices, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_QPS)]
    qps: Vec<u8>,
    /// Output directory for curve CSVs (and SVGs with --svg).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [MethodArg::Proposed, MethodArg::Regular, MethodArg::Single, MethodArg::Predeconv])]
    methods: Vec<MethodArg>,
    /// Also emit an SVG chart per image.
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value = "auto")]
    beta_tilde: BetaTildeArg,
    #[arg(long, default_value_t = 40)]
    max_iters: usize,
    /// Predeconv regularization weights to try per rate point.
    #[arg(long, value_delimiter = ',')]
    reg_weights: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = CodecArg::Reference)]
    codec: CodecArg,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of .pgm images.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ensemble: PathBuf,
    /// Quality indices for the high-rate comparison.
    #[arg(long, value_delimiter = ',', default_values_t = HIGH_RATE_QPS)]
    qps: Vec<u8>,
    /// Output directory for report.csv and per-image curve CSVs.
    #[arg(long)]
    out: PathBuf,
    /// Also emit an SVG chart per image.
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value = "auto")]
    beta_tilde: BetaTildeArg,
    #[arg(long, default_value_t = 40)]
    max_iters: usize,
    #[arg(long, value_delimiter = ',')]
    reg_weights: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = CodecArg::Reference)]
    codec: CodecArg,
}

enum CliError {
    Usage(String),
    Io(String),
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Compute(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Compute(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_toolkit(path: &Path) -> Result<(ToolkitConfig, DegradationEnsemble), CliError> {
    let (config, dir) = ToolkitConfig::load(path).map_err(CliError::Io)?;
    let ensemble = config.build_ensemble(&dir).map_err(CliError::Io)?;
    Ok((config, ensemble))
}

fn build_codec(arg: CodecArg, config: &ToolkitConfig) -> Result<Box<dyn Codec>, CliError> {
    match arg {
        CodecArg::Reference => Ok(Box::new(ReferenceCodec::new())),
        CodecArg::External => {
            let cfg = config.external_codec_config().map_err(CliError::Io)?;
            let codec = ExternalCodec::new(cfg).map_err(|e| CliError::Io(e.to_string()))?;
            Ok(Box::new(codec))
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("renaming to {}: {e}", path.display())))?;
    Ok(())
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliError> {
    let x = pgm::load(&args.input)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let (config, ensemble) = load_toolkit(&args.ensemble)?;
    let codec = build_codec(args.codec, &config)?;

    if args.trace.is_some() && !matches!(args.method, MethodArg::Proposed | MethodArg::Single) {
        return Err(CliError::Usage(
            "--trace is only available for --method proposed|single".into(),
        ));
    }
    if args.max_iters == 0 {
        return Err(CliError::Usage("--max-iters must be at least 1".into()));
    }

    let mut admm_cfg = AdmmConfig::new(args.qp, args.beta_tilde.resolve(args.qp));
    admm_cfg.max_iterations = args.max_iters;

    let (bitstream, trace): (Bitstream, Option<AdmmTrace>) = match args.method {
        MethodArg::Proposed => {
            let (b, t) = encode_for_network(&x, &ensemble, codec.as_ref(), &admm_cfg)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            (b, Some(t))
        }
        MethodArg::Single => {
            let (b, t) = single_display_encode(&x, &ensemble, codec.as_ref(), &admm_cfg)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            (b, Some(t))
        }
        MethodArg::Regular => {
            let b = regular_encode(&x, codec.as_ref(), args.qp)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            (b, None)
        }
        MethodArg::Predeconv => {
            let b = predeconv_encode(&x, &ensemble, codec.as_ref(), args.qp, args.reg_weight)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            (b, None)
        }
    };

    write_atomic(&args.output, bitstream.bytes())?;
    if let (Some(path), Some(trace)) = (&args.trace, &trace) {
        write_atomic(path, trace.to_csv().as_bytes())?;
    }

    let decoded = codec
        .decompress(&bitstream)
        .map_err(|e| CliError::Compute(format!("verifying output stream: {e}")))?;
    let psnr = expected_psnr(&x, &decoded, &ensemble)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let mut line = format!(
        "method={} qp={} bits={} bpp={:.6} expected_psnr_db={:.4}",
        method_name(args.method),
        args.qp,
        bitstream.bit_length(),
        bitstream.bits_per_pixel(x.len()),
        psnr
    );
    if let Some(trace) = &trace {
        let _ = write!(
            line,
            " iterations={} termination={}",
            trace.iterations(),
            trace.termination().as_str()
        );
    }
    println!("{line}");
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let bitstream = Bitstream::from_bytes(bytes);

    let toolkit = match (&args.display, &args.ensemble) {
        (Some(_), None) => {
            return Err(CliError::Usage("--display requires --ensemble".into()));
        }
        (_, Some(path)) => Some(load_toolkit(path)?),
        (None, None) => None,
    };
    let codec: Box<dyn Codec> = match args.codec {
        CodecArg::Reference => Box::new(ReferenceCodec::new()),
        CodecArg::External => {
            let (config, _) = toolkit
                .as_ref()
                .ok_or_else(|| CliError::Usage("--codec external requires --ensemble".into()))?;
            build_codec(CodecArg::External, config)?
        }
    };

    let decoded = codec
        .decompress(&bitstream)
        .map_err(|e| CliError::Io(format!("invalid bitstream: {e}")))?;

    let (exported, display_note) = match args.display {
        None => (decoded, String::new()),
        Some(k) => {
            let (_, ensemble) = toolkit.as_ref().expect("checked above");
            if k == 0 || k > ensemble.len() {
                return Err(CliError::Usage(format!(
                    "--display must be in 1..={}, got {k}",
                    ensemble.len()
                )));
            }
            let op = &ensemble.entries()[k - 1].operator;
            let displayed = op
                .apply(&decoded)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            (displayed, format!(" display={k}"))
        }
    };
    write_atomic(&args.output, &pgm::encode(&exported))?;
    println!(
        "width={} height={}{display_note} output={}",
        exported.width(),
        exported.height(),
        args.output.display()
    );
    Ok(())
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Proposed => "proposed",
        MethodArg::Regular => "regular",
        MethodArg::Single => "single",
        MethodArg::Predeconv => "predeconv",
    }
}

fn build_method(
    arg: MethodArg,
    beta: BetaTildeArg,
    max_iters: usize,
    reg_weights: &Option<Vec<f64>>,
) -> Method {
    let admm = AdmmSettings {
        beta_tilde: beta.fixed(),
        max_iterations: max_iters,
        ..AdmmSettings::default()
    };
    match arg {
        MethodArg::Proposed => Method::Proposed(admm),
        MethodArg::Single => Method::SingleDisplay(admm),
        MethodArg::Regular => Method::Regular,
        MethodArg::Predeconv => {
            let mut settings = PredeconvSettings::default();
            if let Some(w) = reg_weights {
                settings.reg_weights = w.clone();
            }
            Method::Predeconv(settings)
        }
    }
}

/// Loads every `.pgm` in a directory, sorted by name. Unreadable images are
/// reported per file; an empty result is an error.
fn load_corpus(dir: &Path) -> Result<Vec<(String, Signal)>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "pgm"))
        .collect();
    paths.sort();
    let mut corpus = Vec::new();
    for path in paths {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into());
        match pgm::load(&path) {
            Ok(signal) => corpus.push((name, signal)),
            Err(e) => eprintln!("image={name} error={e}"),
        }
    }
    if corpus.is_empty() {
        return Err(CliError::Io(format!(
            "no readable .pgm images in {}",
            dir.display()
        )));
    }
    Ok(corpus)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    if args.qps.is_empty() {
        return Err(CliError::Usage("--qps must not be empty".into()));
    }
    if args.methods.is_empty() {
        return Err(CliError::Usage("--methods must not be empty".into()));
    }
    let corpus = load_corpus(&args.corpus)?;
    let (config, ensemble) = load_toolkit(&args.ensemble)?;
    let codec = build_codec(args.codec, &config)?;

    for (name, x) in &corpus {
        let mut curves = Vec::new();
        for &method_arg in &args.methods {
            let method = build_method(method_arg, args.beta_tilde, args.max_iters, &args.reg_weights);
            match sweep(x, &ensemble, &method, codec.as_ref(), &args.qps) {
                Ok(result) => {
                    for s in &result.skipped {
                        eprintln!(
                            "image={name} method={} qp={} skipped: {}",
                            method.label(),
                            s.qp,
                            s.reason
                        );
                    }
                    curves.push(result.curve);
                }
                Err(e) => eprintln!("image={name} method={} failed: {e}", method.label()),
            }
        }
        if curves.is_empty() {
            eprintln!("image={name} produced no curves");
            continue;
        }
        let csv_path = args.out.join(format!("{name}.curves.csv"));
        write_atomic(&csv_path, curves_to_csv(&curves).as_bytes())?;
        if args.svg {
            let svg_path = args.out.join(format!("{name}.svg"));
            write_atomic(&svg_path, rd_chart(name, &curves).as_bytes())?;
        }
        println!("image={name} curves={} out={}", curves.len(), csv_path.display());
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    if args.qps.is_empty() {
        return Err(CliError::Usage("--qps must not be empty".into()));
    }
    let corpus = load_corpus(&args.corpus)?;
    let (config, ensemble) = load_toolkit(&args.ensemble)?;
    let codec = build_codec(args.codec, &config)?;

    let mut report_cfg = ReportConfig {
        qps: args.qps.clone(),
        admm: AdmmSettings {
            beta_tilde: args.beta_tilde.fixed(),
            max_iterations: args.max_iters,
            ..AdmmSettings::default()
        },
        predeconv: PredeconvSettings::default(),
    };
    if let Some(w) = &args.reg_weights {
        report_cfg.predeconv.reg_weights = w.clone();
    }

    let table = high_rate_report(&corpus, &ensemble, codec.as_ref(), &report_cfg);
    write_atomic(&args.out.join("report.csv"), table.to_csv().as_bytes())?;

    for row in &table.rows {
        if !row.curves.is_empty() {
            let csv_path = args.out.join(format!("{}.curves.csv", row.image));
            write_atomic(&csv_path, curves_to_csv(&row.curves).as_bytes())?;
            if args.svg {
                let svg_path = args.out.join(format!("{}.svg", row.image));
                write_atomic(&svg_path, rd_chart(&row.image, &row.curves).as_bytes())?;
            }
        }
        let cell = |r: &Result<f64, String>| match r {
            Ok(v) => format!("{v:.4}"),
            Err(_) => "NA".into(),
        };
        for (label, value) in [
            ("gain_vs_regular", &row.gain_vs_regular),
            ("gain_vs_predeconv", &row.gain_vs_predeconv),
            ("gain_vs_single", &row.gain_vs_single),
        ] {
            if let Err(reason) = value {
                eprintln!("image={} {label} unavailable: {reason}", row.image);
            }
        }
        println!(
            "image={} gain_vs_regular={} gain_vs_predeconv={} gain_vs_single={}",
            row.image,
            cell(&row.gain_vs_regular),
            cell(&row.gain_vs_predeconv),
            cell(&row.gain_vs_single)
        );
    }
    println!("report={}", args.out.join("report.csv").display());
    Ok(())
}
