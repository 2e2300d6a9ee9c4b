use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{Command, Format};
use crate::error::CliError;

/// Everything needed to regenerate a run's data files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub command: Command,
    pub format: Format,
    pub master_seed: Option<u64>,
    pub version: String,
    pub threads: usize,
    pub outputs: Vec<PathBuf>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn path_for(out_dir: &Path, subcommand: &str) -> PathBuf {
        out_dir.join(format!("{subcommand}.manifest.json"))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }
}
