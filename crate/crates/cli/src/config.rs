//! Defaults file accepted by `--config`. Every section and field is optional;
//! command-line flags win over the file, the file wins over built-in defaults.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use srep::datagen::{default_role_vocab, default_symbol_vocab, GenConfig};
use srep::hrr::{PermuteMode, SweepConfig, UnbindMode, DEFAULT_TAU};
use srep::tpr::{Scheme, DEFAULT_MISS_TOL};

use crate::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub gen: GenConfig,
    pub sweep: SweepConfig,
    pub encode: EncodeConfig,
    pub superpose: SuperposeConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeConfig {
    pub tpr_scheme: Scheme,
    pub sym_dim: usize,
    pub role_dim: usize,
    pub hrr_dim: usize,
    pub mode: PermuteMode,
    pub unbind: UnbindMode,
    pub tau: f64,
    pub miss_tol: f64,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        EncodeConfig {
            tpr_scheme: Scheme::Gaussian,
            sym_dim: 16,
            role_dim: 16,
            hrr_dim: 1024,
            mode: PermuteMode::Permuted,
            unbind: UnbindMode::Correlation,
            tau: DEFAULT_TAU,
            miss_tol: DEFAULT_MISS_TOL,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperposeConfig {
    pub quadruples: usize,
    pub symbols: Vec<String>,
    pub roles: Vec<String>,
    /// Deepest TPR component kept when flattening.
    pub max_depth: usize,
}

impl Default for SuperposeConfig {
    fn default() -> Self {
        SuperposeConfig {
            quadruples: 1000,
            symbols: default_symbol_vocab().into_iter().take(16).collect(),
            roles: default_role_vocab().into_iter().take(16).collect(),
            max_depth: 1,
        }
    }
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}
