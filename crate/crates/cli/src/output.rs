use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Inputs read and outputs written by one command, for the run manifest.
#[derive(Default)]
pub struct Io {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl Io {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        self.inputs.push(path.to_path_buf());
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }

    /// Writes through a temporary file in the target directory, then renames.
    pub fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
        tmp.write_all(contents.as_bytes())?;
        tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub inputs: &'a [PathBuf],
    pub parameters: serde_json::Value,
    pub outputs: &'a [PathBuf],
    pub exit_status: u8,
    pub wall_time_seconds: f64,
}
