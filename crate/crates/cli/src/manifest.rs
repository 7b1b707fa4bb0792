use serde::Serialize;
use serde_json::Value;

/// Record written next to every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub config_path: String,
    /// Content hash of the configuration file as read.
    pub input_hash: String,
    /// Every setting after defaults and overrides were applied.
    pub resolved_config: Value,
    pub model: Value,
    pub seed: u64,
    pub seed_source: &'static str,
    pub versions: Versions,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub diagnostics: Value,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub lmi_core: &'static str,
    pub lmi_cli: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            lmi_core: lmi_core::VERSION,
            lmi_cli: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}
