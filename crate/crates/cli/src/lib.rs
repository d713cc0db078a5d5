//! Experiment runner and acceptance checks built on `iucorr-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod montecarlo;
pub mod quadrature;
pub mod table;
pub mod verify;

use std::path::{Path, PathBuf};

use iucorr_core::synthetic::SyntheticDatasetSpec;
use serde::Deserialize;

pub use error::{CliError, CliResult};

/// `gen-synthetic` config: an output directory and the generator settings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSyntheticConfig {
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub dataset: SyntheticDatasetSpec,
}

impl GenSyntheticConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::invalid(format!("config: {e}")))
    }
}
