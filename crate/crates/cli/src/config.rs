//! TOML experiment configuration.
//!
//! ```toml
//! tests = ["kb", "hz"]
//! distributions = ["NormalStdIso", "ChiSq(1)", "Uniform(0,1)"]
//! sizes = [250, 500]
//! dims = [5, 10]
//! alpha = 0.05
//! repetitions = 200
//! master_seed = 42
//! size_convention = "per_half"
//!
//! [output]
//! dir = "report"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use mvnt::dist::Law;
use serde::Deserialize;
use thiserror::Error;

use crate::experiment::{ExperimentConfig, SizeConvention, TestKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    tests: Vec<String>,
    distributions: Vec<String>,
    sizes: Vec<usize>,
    dims: Vec<usize>,
    #[serde(default = "default_alpha")]
    alpha: f64,
    repetitions: usize,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_convention")]
    size_convention: String,
    #[serde(default)]
    output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: PathBuf,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_convention() -> String {
    "per_half".to_string()
}

/// A parsed and validated configuration plus its output directory.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub experiment: ExperimentConfig,
    pub output_dir: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;

    let tests = file
        .tests
        .iter()
        .map(|t| t.parse::<TestKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(ConfigError::Parse)?;
    let distributions = file
        .distributions
        .iter()
        .map(|t| t.parse::<Law>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ConfigError::Parse)?;
    let size_convention = file
        .size_convention
        .parse::<SizeConvention>()
        .map_err(ConfigError::Parse)?;

    let experiment = ExperimentConfig {
        tests,
        distributions,
        sizes: file.sizes,
        dims: file.dims,
        alpha: file.alpha,
        repetitions: file.repetitions,
        master_seed: file.master_seed,
        size_convention,
    };
    experiment.validate().map_err(ConfigError::Parse)?;
    Ok(LoadedConfig {
        experiment,
        output_dir: file.output.map(|o| o.dir),
    })
}
