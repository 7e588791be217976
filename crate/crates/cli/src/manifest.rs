use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

use srrwave::config::RunConfig;
use srrwave::export::write_json;
use srrwave::Result;

use crate::args::Cli;

/// SHA-256 of the git blob encoding `blob <len>\0<content>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    format!("{:x}", h.finalize())
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

impl FileEntry {
    fn of(path: &Path, name: String) -> Option<Self> {
        let bytes = std::fs::read(path).ok()?;
        Some(Self { path: name, bytes: bytes.len(), sha256: content_hash(&bytes) })
    }
}

pub enum Status {
    Ok,
    Failed(String),
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    command: String,
    arguments: Vec<String>,
    inputs: Vec<FileEntry>,
    seed: Option<u64>,
    artifacts: Vec<FileEntry>,
    wall_seconds: f64,
    status: &'static str,
    error: Option<String>,
}

pub const EFFECTIVE_CONFIG: &str = "config.toml";
pub const FAILURE_MARKER: &str = "FAILED";

impl Manifest {
    pub fn new(command: &str, arguments: Vec<String>) -> Self {
        Self {
            command: command.into(),
            arguments,
            inputs: Vec::new(),
            seed: None,
            artifacts: Vec::new(),
            wall_seconds: 0.0,
            status: "running",
            error: None,
        }
    }

    /// Records the configuration file (if any) and writes the effective configuration.
    pub fn record_config(&mut self, cli: &Cli, cfg: &RunConfig) -> Result<()> {
        if let Some(path) = &cli.config {
            self.inputs.extend(FileEntry::of(path, path.display().to_string()));
        }
        let effective = cli.out.join(EFFECTIVE_CONFIG);
        std::fs::write(&effective, cfg.to_toml())?;
        self.inputs.extend(FileEntry::of(&effective, EFFECTIVE_CONFIG.into()));
        self.seed = Some(cfg.simulation.seed);
        Ok(())
    }

    pub fn finish(&mut self, dir: &Path, files: &[String], status: Status, seconds: f64) {
        self.artifacts = files.iter().filter_map(|f| FileEntry::of(&dir.join(f), f.clone())).collect();
        self.wall_seconds = seconds;
        match status {
            Status::Ok => self.status = "ok",
            Status::Failed(msg) => {
                self.status = "failed";
                self.error = Some(msg);
            }
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let marker = dir.join(FAILURE_MARKER);
        match &self.error {
            Some(msg) => std::fs::write(&marker, format!("{msg}\n"))?,
            None if marker.exists() => std::fs::remove_file(&marker)?,
            None => {}
        }
        write_json(&dir.join("manifest.json"), self)
    }
}
