//! Run manifests written next to every output file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub flags: &'a Value,
    pub seed: u64,
    pub version: &'a str,
    pub wall_time_seconds: f64,
}

/// `out.csv` → `out.csv.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name: OsString = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// What every output of one invocation shares.
pub struct Run {
    pub command: &'static str,
    pub flags: Value,
    pub seed: u64,
    started: Instant,
}

impl Run {
    pub fn new(command: &'static str, flags: Value, seed: u64) -> Self {
        Self {
            command,
            flags,
            seed,
            started: Instant::now(),
        }
    }

    /// Writes `contents` to `path` and its manifest beside it.
    pub fn write_output(&self, path: &Path, contents: &str) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
        let manifest = RunManifest {
            command: self.command,
            flags: &self.flags,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let mpath = manifest_path(path);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&mpath, text + "\n").map_err(|e| CliError::io(&mpath, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_beside_output() {
        assert_eq!(manifest_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.manifest.json"));
    }
}
