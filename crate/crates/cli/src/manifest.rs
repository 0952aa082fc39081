//! `manifest.json`: what a command ran with and what became of each item.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemStatus {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ItemStatus {
    pub fn new(name: impl Into<String>, status: impl Into<String>, message: Option<String>) -> Self {
        Self {
            name: name.into(),
            status: status.into(),
            message,
        }
    }

    pub fn ok(name: impl Into<String>) -> Self {
        Self::new(name, "ok", None)
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub status: &'a str,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub seed: u64,
    pub jobs: usize,
    pub config: &'a RunConfig,
    pub started_at: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    pub items: &'a [ItemStatus],
}

pub fn versions() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("trafficcast", env!("CARGO_PKG_VERSION")),
        ("model_format", trafficcast::model_io::VERSION),
    ])
}

pub fn write(dir: &Path, manifest: &Manifest<'_>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(trafficcast::Error::from)?;
    text.push('\n');
    let path = dir.join("manifest.json");
    std::fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}
