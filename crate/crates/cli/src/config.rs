//! Toolkit configuration: the display ensemble and the optional external
//! codec section.
//!
//! ```toml
//! boundary = "periodic"
//!
//! [[display]]
//! sigma = 0.6          # gaussian kernel, requires `size`
//! size = 15
//! probability = 0.6
//!
//! [[display]]
//! kernel = "psf.txt"   # or a kernel matrix file (relative to this config)
//! probability = 0.4
//!
//! [external_codec]     # optional; enables --codec external
//! encoder = "bpgenc -q {qp} -o {output} {input}"
//! decoder = "bpgdec -o {output} {input}"
//! timeout_seconds = 60
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use netcomp_core::codec::external::ExternalCodecConfig;
use netcomp_core::ensemble::DegradationEnsemble;
use netcomp_core::operators::{gaussian_kernel, BlurOperator, BoundaryMode, Kernel};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolkitConfig {
    #[serde(default = "default_boundary")]
    pub boundary: String,
    #[serde(default, rename = "display")]
    pub displays: Vec<DisplayEntry>,
    pub external_codec: Option<ExternalCodecSection>,
}

fn default_boundary() -> String {
    "periodic".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplayEntry {
    pub sigma: Option<f64>,
    pub size: Option<usize>,
    pub kernel: Option<String>,
    pub probability: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalCodecSection {
    pub encoder: String,
    pub decoder: String,
    pub timeout_seconds: Option<u64>,
}

impl ToolkitConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let config: ToolkitConfig =
            toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        let dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, dir))
    }

    pub fn boundary_mode(&self) -> Result<BoundaryMode, String> {
        match self.boundary.as_str() {
            "periodic" => Ok(BoundaryMode::Periodic),
            "symmetric" => Ok(BoundaryMode::Symmetric),
            other => Err(format!(
                "unknown boundary {other:?}, expected \"periodic\" or \"symmetric\""
            )),
        }
    }

    /// Builds the ensemble; kernel file paths resolve relative to `base_dir`.
    pub fn build_ensemble(&self, base_dir: &Path) -> Result<DegradationEnsemble, String> {
        if self.displays.is_empty() {
            return Err("config defines no [[display]] entries".into());
        }
        let boundary = self.boundary_mode()?;
        let mut pairs = Vec::new();
        for (i, entry) in self.displays.iter().enumerate() {
            let kernel = entry.build_kernel(base_dir, i)?;
            pairs.push((BlurOperator::new(kernel, boundary), entry.probability));
        }
        DegradationEnsemble::from_pairs(pairs).map_err(|e| e.to_string())
    }

    pub fn external_codec_config(&self) -> Result<ExternalCodecConfig, String> {
        let section = self
            .external_codec
            .as_ref()
            .ok_or("config has no [external_codec] section")?;
        let mut config = ExternalCodecConfig::new(&section.encoder, &section.decoder);
        if let Some(secs) = section.timeout_seconds {
            config.timeout = Duration::from_secs(secs);
        }
        Ok(config)
    }
}

impl DisplayEntry {
    fn build_kernel(&self, base_dir: &Path, index: usize) -> Result<Kernel, String> {
        match (&self.kernel, self.sigma, self.size) {
            (Some(path), None, None) => {
                let resolved = if Path::new(path).is_absolute() {
                    PathBuf::from(path)
                } else {
                    base_dir.join(path)
                };
                Kernel::load(&resolved)
                    .map_err(|e| format!("display {index}: kernel file {path:?}: {e}"))
            }
            (None, Some(sigma), Some(size)) => gaussian_kernel(size, sigma)
                .map_err(|e| format!("display {index}: {e}")),
            (None, _, _) => Err(format!(
                "display {index}: need both sigma and size, or a kernel file"
            )),
            (Some(_), _, _) => Err(format!(
                "display {index}: kernel file and sigma/size are mutually exclusive"
            )),
        }
    }
}
