use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;

/// What a command read, wrote and how long each stage took.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command: Vec<String>,
    pub scenario: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    /// Paths relative to the output directory, sorted.
    pub artifacts: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
    #[serde(skip)]
    out: PathBuf,
}

impl RunManifest {
    pub fn new(out: &Path, scenario: Option<&Path>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            scenario: scenario.map(|p| p.display().to_string()),
            seeds: BTreeMap::new(),
            artifacts: Vec::new(),
            timings_ms: BTreeMap::new(),
            out: out.to_path_buf(),
        }
    }

    /// Absolute path of `name` inside the output directory, recorded as an
    /// artifact.
    pub fn artifact(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.out.join(name)
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let started = Instant::now();
        let r = f();
        *self.timings_ms.entry(stage.to_string()).or_insert(0) += started.elapsed().as_millis();
        r
    }

    pub fn write(mut self) -> Result<(), CliError> {
        self.artifacts.sort();
        self.artifacts.dedup();
        let path = self.out.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n";
        std::fs::create_dir_all(&self.out)
            .and_then(|_| std::fs::write(&path, text))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}
