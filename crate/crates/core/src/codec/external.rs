//! Adapter that drives an external encoder/decoder pair (an HEVC-class
//! still-image codec, say) behind the [`Codec`] interface.
//!
//! Commands are configured as templates with `{input}`, `{output}` and `{qp}`
//! placeholders. Image hand-off uses 8-bit binary PGM, so out-of-range
//! intermediates are clamped at this boundary; that is inherent to 8-bit
//! external codecs. The compressed rate is the on-disk size in bits.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::pgm;
use crate::signal::{Bitstream, Signal};

use super::{Codec, CodecError, THETA_MAX};

/// Command templates and limits for one external codec.
#[derive(Debug, Clone)]
pub struct ExternalCodecConfig {
    /// E.g. `bpgenc -q {qp} -o {output} {input}`.
    pub encoder_template: String,
    /// E.g. `bpgdec -o {output} {input}`.
    pub decoder_template: String,
    /// Per-invocation wall-clock limit.
    pub timeout: Duration,
}

impl ExternalCodecConfig {
    pub fn new(encoder_template: impl Into<String>, decoder_template: impl Into<String>) -> Self {
        Self {
            encoder_template: encoder_template.into(),
            decoder_template: decoder_template.into(),
            timeout: Duration::from_secs(60),
        }
    }
}

/// Subprocess-backed codec. Construction verifies both executables exist, so
/// misconfiguration fails before any encode is attempted.
#[derive(Debug)]
pub struct ExternalCodec {
    config: ExternalCodecConfig,
}

impl ExternalCodec {
    pub fn new(config: ExternalCodecConfig) -> Result<Self, CodecError> {
        check_executable(&config.encoder_template, "encoder")?;
        check_executable(&config.decoder_template, "decoder")?;
        Ok(Self { config })
    }

    fn run_template(
        &self,
        template: &str,
        input: &Path,
        output: &Path,
        qp: u8,
    ) -> Result<(), CodecError> {
        let args = render_template(template, input, output, qp)?;
        let (program, rest) = args
            .split_first()
            .ok_or_else(|| CodecError::External("empty command template".into()))?;
        let mut child = Command::new(program)
            .args(rest)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| CodecError::External(format!("failed to spawn {program}: {e}")))?;
        let deadline = Instant::now() + self.config.timeout;
        loop {
            match child.try_wait() {
                Ok(Some(status)) => {
                    if status.success() {
                        return Ok(());
                    }
                    let output = child.wait_with_output().ok();
                    let stderr = output
                        .map(|o| String::from_utf8_lossy(&o.stderr).trim().to_string())
                        .unwrap_or_default();
                    return Err(CodecError::External(format!(
                        "{program} exited with {status}: {stderr}"
                    )));
                }
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(CodecError::External(format!(
                            "{program} timed out after {:?}",
                            self.config.timeout
                        )));
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(e) => {
                    return Err(CodecError::External(format!("waiting for {program}: {e}")))
                }
            }
        }
    }
}

impl Codec for ExternalCodec {
    fn compress(&self, signal: &Signal, theta: u8) -> Result<Bitstream, CodecError> {
        if theta > THETA_MAX {
            return Err(CodecError::InvalidTheta(theta));
        }
        let dir = tempfile::tempdir()
            .map_err(|e| CodecError::External(format!("temp dir: {e}")))?;
        let input = dir.path().join("input.pgm");
        let output = dir.path().join("compressed.bin");
        pgm::save(signal, &input).map_err(|e| CodecError::External(format!("write pgm: {e}")))?;
        self.run_template(&self.config.encoder_template, &input, &output, theta)?;
        let bytes = std::fs::read(&output).map_err(|e| {
            CodecError::External(format!("encoder produced no readable output: {e}"))
        })?;
        Ok(Bitstream::from_bytes(bytes))
    }

    fn decompress(&self, bitstream: &Bitstream) -> Result<Signal, CodecError> {
        let dir = tempfile::tempdir()
            .map_err(|e| CodecError::External(format!("temp dir: {e}")))?;
        let input = dir.path().join("compressed.bin");
        let output = dir.path().join("decoded.pgm");
        std::fs::write(&input, bitstream.bytes())
            .map_err(|e| CodecError::External(format!("write stream: {e}")))?;
        self.run_template(&self.config.decoder_template, &input, &output, 0)?;
        pgm::load(&output)
            .map_err(|e| CodecError::External(format!("decoder output unparseable: {e}")))
    }
}

fn render_template(
    template: &str,
    input: &Path,
    output: &Path,
    qp: u8,
) -> Result<Vec<String>, CodecError> {
    let input = input.to_str().ok_or_else(|| {
        CodecError::External("non-UTF-8 temp path".into())
    })?;
    let output = output.to_str().ok_or_else(|| {
        CodecError::External("non-UTF-8 temp path".into())
    })?;
    Ok(template
        .split_whitespace()
        .map(|tok| {
            tok.replace("{input}", input)
                .replace("{output}", output)
                .replace("{qp}", &qp.to_string())
        })
        .collect())
}

fn check_executable(template: &str, role: &str) -> Result<(), CodecError> {
    let program = template
        .split_whitespace()
        .next()
        .ok_or_else(|| CodecError::External(format!("{role} template is empty")))?;
    if find_program(program).is_none() {
        return Err(CodecError::External(format!(
            "{role} executable {program:?} not found"
        )));
    }
    Ok(())
}

fn find_program(program: &str) -> Option<PathBuf> {
    let candidate = Path::new(program);
    if candidate.components().count() > 1 {
        return candidate.is_file().then(|| candidate.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}
