//! Run manifests: what was run, with which resolved settings, and the
//! checksums of everything written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved settings of `command`; replaying them reproduces the outputs.
    pub config: serde_json::Value,
    pub base_seed: Option<u64>,
    /// Worker count used for this run. Outputs do not depend on it.
    pub workers: Option<usize>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputChecksum>,
}

impl RunManifest {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Collects the files of one run and writes the manifest next to them.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<String>,
    started_at: String,
}

impl OutputSet {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started_at: now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> std::io::Result<()> {
        fs::write(self.path(name), contents)?;
        self.register(name);
        Ok(())
    }

    /// Records a file written by other means.
    pub fn register(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        base_seed: Option<u64>,
        workers: Option<usize>,
    ) -> std::io::Result<RunManifest> {
        let mut outputs = Vec::with_capacity(self.files.len());
        for f in &self.files {
            outputs.push(OutputChecksum {
                file: f.clone(),
                sha256: sha256_hex(&fs::read(self.dir.join(f))?),
            });
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            base_seed,
            workers,
            started_at: self.started_at,
            finished_at: now(),
            outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        fs::write(self.dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
