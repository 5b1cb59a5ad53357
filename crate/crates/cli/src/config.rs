use std::collections::BTreeMap;
use std::path::Path;

use pnlab::eisenstein::TailMode;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_HEIGHT: i64 = 50;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationDefaults {
    #[serde(rename = "H")]
    pub h: Option<i64>,
    pub tail_mode: Option<TailMode>,
}

/// Settings read from `--config`; command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub truncation: TruncationDefaults,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn tolerance(&self, name: &str, flag: Option<f64>, default: f64) -> f64 {
        flag.or_else(|| self.tolerances.get(name).copied()).unwrap_or(default)
    }

    pub fn height(&self, flag: Option<i64>) -> i64 {
        flag.or(self.truncation.h).unwrap_or(DEFAULT_HEIGHT)
    }

    pub fn tail_mode(&self, flag: Option<TailMode>) -> TailMode {
        flag.or(self.truncation.tail_mode).unwrap_or_default()
    }
}

/// `--threads`, then `PNLAB_THREADS`, then the config file; `None` lets the
/// pool size itself.
pub fn thread_count(flag: Option<usize>, config: &RunConfig) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Ok(v) = std::env::var("PNLAB_THREADS") {
        let v = v.trim();
        if !v.is_empty() && v != "auto" {
            let t = v.parse::<usize>().map_err(|_| CliError::Input(format!("PNLAB_THREADS must be a count or \"auto\", got {v:?}")))?;
            return Ok(Some(t));
        }
        return Ok(None);
    }
    Ok(config.threads)
}
