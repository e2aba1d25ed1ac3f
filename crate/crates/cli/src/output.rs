//! Output directory handling and the run manifest.
//!
//! Every file a command writes goes through [`RunOutput`], which records it
//! for the manifest. A failed run removes what it wrote, so the directory
//! never holds a partial result.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clickbait::corpus::SeedEntry;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, runtime, CliError};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub seeds: Vec<SeedEntry>,
    pub artifacts: Vec<Artifact>,
    /// Command-specific results (counts, mean metrics, ...).
    pub results: serde_json::Value,
    pub wall_seconds: f64,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest, CliError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| config(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
    }
}

pub struct RunOutput {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<String>,
    started: Instant,
}

impl RunOutput {
    /// Prepares `dir` for a run. Files listed by a previous run's manifest
    /// are removed first; any other file in the directory is an error, since
    /// it would be an artifact no manifest accounts for.
    pub fn create(dir: &Path) -> Result<RunOutput, CliError> {
        let started = Instant::now();
        let created_dir = !dir.exists();
        if !created_dir {
            clear_previous_run(dir)?;
        }
        fs::create_dir_all(dir).map_err(|e| runtime(format!("creating {}: {e}", dir.display())))?;
        Ok(RunOutput { dir: dir.to_path_buf(), created_dir, written: Vec::new(), started })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        self.record(name)?;
        fs::write(self.dir.join(name), bytes).map_err(|e| runtime(format!("writing {name}: {e}")))
    }

    /// Streams into `name` through a buffered writer.
    pub fn write_with<F, E>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), E>,
        E: std::fmt::Display,
    {
        self.record(name)?;
        let file = fs::File::create(self.dir.join(name)).map_err(|e| runtime(format!("creating {name}: {e}")))?;
        let mut w = std::io::BufWriter::new(file);
        body(&mut w).map_err(|e| runtime(format!("writing {name}: {e}")))?;
        w.flush().map_err(|e| runtime(format!("writing {name}: {e}")))
    }

    /// Registers a file that a library routine writes by path itself.
    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        if name == MANIFEST || self.written.iter().any(|w| w == name) {
            return Err(runtime(format!("artifact {name} written twice")));
        }
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        seeds: Vec<SeedEntry>,
        results: serde_json::Value,
    ) -> Result<Manifest, CliError> {
        let mut artifacts = Vec::with_capacity(self.written.len());
        for name in &self.written {
            let bytes = fs::read(self.dir.join(name)).map_err(|e| runtime(format!("hashing {name}: {e}")))?;
            artifacts.push(Artifact { path: name.clone(), sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64 });
        }
        artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config,
            seeds,
            artifacts,
            results,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(runtime)?;
        fs::write(self.dir.join(MANIFEST), text + "\n").map_err(|e| runtime(format!("writing {MANIFEST}: {e}")))?;
        Ok(manifest)
    }

    /// Removes everything this run wrote.
    pub fn abort(self) {
        for name in &self.written {
            let _ = fs::remove_file(self.dir.join(name));
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn clear_previous_run(dir: &Path) -> Result<(), CliError> {
    if !dir.is_dir() {
        return Err(config(format!("output_dir: {} is not a directory", dir.display())));
    }
    let mut known = vec![MANIFEST.to_string()];
    if dir.join(MANIFEST).exists() {
        known.extend(Manifest::read(dir)?.artifacts.into_iter().map(|a| a.path));
    }
    let entries = fs::read_dir(dir).map_err(|e| runtime(format!("listing {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(runtime)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if !known.contains(&name) {
            return Err(config(format!(
                "output_dir: {} contains {name}, which no previous run's manifest lists",
                dir.display()
            )));
        }
    }
    for name in known {
        let p = dir.join(&name);
        if p.exists() {
            fs::remove_file(&p).map_err(|e| runtime(format!("removing {}: {e}", p.display())))?;
        }
    }
    Ok(())
}
