use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use wordlink::estimation::ConvergenceReport;
use wordlink::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let sha256 = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceSummary {
    pub iterations: usize,
    pub converged: bool,
    pub final_delta: Option<f64>,
}

impl From<&ConvergenceReport> for ConvergenceSummary {
    fn from(r: &ConvergenceReport) -> Self {
        ConvergenceSummary {
            iterations: r.iteration_count(),
            converged: r.converged,
            final_delta: r.iterations.last().and_then(|it| it.delta),
        }
    }
}

/// Record of one run: what was asked, what was read and written.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_secs: f64,
    pub convergence: Option<ConvergenceSummary>,
}

/// Collects manifest fields while a command runs.
pub struct Recorder {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    started: Instant,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    pub convergence: Option<ConvergenceSummary>,
}

impl Recorder {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> Self {
        Recorder {
            command: command.to_string(),
            config,
            seed,
            started: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            convergence: None,
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn finish(self) -> Result<RunManifest> {
        let digest = |paths: &[PathBuf]| paths.iter().map(|p| FileDigest::of(p)).collect::<Result<Vec<_>>>();
        Ok(RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            config: self.config,
            seed: self.seed,
            threads: rayon::current_num_threads(),
            inputs: digest(&self.inputs)?,
            outputs: digest(&self.outputs)?,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            convergence: self.convergence,
        })
    }
}

pub fn write(path: &Path, manifest: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
