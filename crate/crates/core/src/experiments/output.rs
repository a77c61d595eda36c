//! Run manifests and crash-safe output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::scan::PointFailure;
use crate::error::Result;
use crate::series::TimeSeries;
use crate::spectra::KRYLOV_SEED;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Configuration with all defaults filled in.
    pub config: RunConfig,
    pub krylov_seed: u64,
    pub outputs: Vec<PathBuf>,
    pub failures: Vec<PointFailure>,
    /// Command-specific results (fit parameters and the like).
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.materialize(),
            krylov_seed: KRYLOV_SEED,
            outputs: Vec::new(),
            failures: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Writes `bytes` to a sibling temporary file and renames it into place,
/// so an interrupted run never leaves a truncated `path` behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.partial"));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_csv_atomic(path: &Path, series: &TimeSeries) -> Result<()> {
    write_atomic(path, series.to_csv_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    #[test]
    fn atomic_write_replaces_and_cleans_up() {
        let dir = std::env::temp_dir().join(format!("dicke-output-{}", std::process::id()));
        let path = dir.join("nested").join("a.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn manifest_records_materialized_config() {
        let cfg = RunConfig::new(ModelParams::resonant(0.823, 1.0, 20, 60).unwrap());
        let m = Manifest::new("evolve", &cfg);
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(v["config"]["protocol"]["periods"], 150.0);
        assert_eq!(v["config"]["engine"]["initial"], "meanfield");
        assert_eq!(v["config"]["model"]["j"], 10.0);
        assert_eq!(v["krylov_seed"], KRYLOV_SEED);
    }
}
