//! Experiment config files.
//!
//! A config is one JSON object:
//!
//! ```json
//! {
//!   "command": "sweep-n",
//!   "params": { "h0": [[0.7, 0.3], [0.3, 0.7]], "h1": [[0.5, 0.5]], "ns": [8, 16], "scheme": { "kind": "onebit" } },
//!   "output": "runs/sweep",
//!   "seed": 0,
//!   "mode": "exact"
//! }
//! ```
//!
//! `command` and `params` are required. `seed` defaults to 0, `mode` to
//! `exact`. `output` may be left out when `--out` is given. Relative paths
//! in `output` and `params` resolve against the config file's directory;
//! `--out` is taken as given.
//! Unknown keys are rejected at every level.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EvaluateScheme,
    SweepN,
    VerifyPsm,
    HellingerSup,
    TradeoffAudit,
    ReduceChannel,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::EvaluateScheme,
        Command::SweepN,
        Command::VerifyPsm,
        Command::HellingerSup,
        Command::TradeoffAudit,
        Command::ReduceChannel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::EvaluateScheme => "evaluate-scheme",
            Command::SweepN => "sweep-n",
            Command::VerifyPsm => "verify-psm",
            Command::HellingerSup => "hellinger-sup",
            Command::TradeoffAudit => "tradeoff-audit",
            Command::ReduceChannel => "reduce-channel",
        }
    }

    /// Sweep and grid commands also write `plot.svg`.
    pub fn has_plot(self) -> bool {
        matches!(self, Command::SweepN | Command::HellingerSup)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CliError::Validation(format!("unknown command {s:?}")))
    }
}

/// Exact enumeration or Monte Carlo sampling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Mc,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Mc => "mc",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    params: serde_json::Value,
    output: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: serde_json::Value,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub mode: Mode,
    /// Directory that relative paths in `params` are resolved against.
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> CliResult<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        if !raw.params.is_object() {
            return Err(CliError::Validation("params must be an object".into()));
        }
        let base_dir: PathBuf = base_dir.into();
        Ok(Self {
            command: raw.command,
            params: raw.params,
            output: raw.output.map(|o| if o.is_absolute() { o } else { base_dir.join(o) }),
            seed: raw.seed,
            mode: raw.mode,
            base_dir,
        })
    }

    /// Typed view of `params` for the configured command.
    pub fn params<T: DeserializeOwned>(&self) -> CliResult<T> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| CliError::Validation(format!("{} params: {e}", self.command)))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Reads a JSON file referenced from `params`; a missing or malformed
    /// file is a validation error.
    pub fn read_json<T: DeserializeOwned>(&self, path: &Path) -> CliResult<T> {
        let full = self.resolve(path);
        let text = std::fs::read_to_string(&full)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", full.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", full.display())))
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
}

impl RunOptions {
    pub fn apply(&self, mut config: ExperimentConfig) -> CliResult<ExperimentConfig> {
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(mode) = self.mode {
            config.mode = mode;
        }
        if config.output.is_none() {
            return Err(CliError::Validation("no output directory: set \"output\" or pass --out".into()));
        }
        Ok(config)
    }
}
