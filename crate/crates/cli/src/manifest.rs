use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: Value,
    pub master_seed: Option<u64>,
    pub version: &'static str,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<PathBuf>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(config: Value, master_seed: Option<u64>) -> Self {
        Self {
            command_line: std::env::args().collect(),
            config,
            master_seed,
            version: env!("CARGO_PKG_VERSION"),
            started_unix: unix_now(),
            finished_unix: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    /// Stamps the finish time and writes `manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> std::io::Result<PathBuf> {
        self.finished_unix = unix_now();
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
