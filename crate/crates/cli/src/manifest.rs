//! Run manifests: reproducibility metadata written next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub jobs: usize,
    pub wall_time_s: f64,
    /// Per-subcommand parameters, stringified.
    pub params: BTreeMap<String, String>,
    /// sha256 digests of every emitted file.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Collects outputs as they are written, then emits `<out>.manifest.json`.
pub struct ManifestBuilder {
    subcommand: String,
    config_hash: String,
    master_seed: u64,
    params: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    started: std::time::Instant,
    anchor: Option<PathBuf>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> ManifestBuilder {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            config_hash: String::new(),
            master_seed: 0,
            params: BTreeMap::new(),
            outputs: BTreeMap::new(),
            started: std::time::Instant::now(),
            anchor: None,
        }
    }

    pub fn config_bytes(&mut self, bytes: &[u8]) -> &mut Self {
        self.config_hash = format!("sha256:{}", sha256_hex(bytes));
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.master_seed = seed;
        self
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Writes an output file and records its digest. The first output
    /// anchors the manifest path.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
        self.outputs.insert(
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            format!("sha256:{}", sha256_hex(bytes)),
        );
        if self.anchor.is_none() {
            self.anchor = Some(path.to_path_buf());
        }
        Ok(())
    }

    /// Writes `<first-output>.manifest.json`.
    pub fn finish(self, jobs: usize) -> Result<(), CliError> {
        let Some(anchor) = &self.anchor else {
            return Ok(());
        };
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: self.subcommand,
            config_hash: self.config_hash,
            master_seed: self.master_seed,
            jobs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            params: self.params,
            outputs: self.outputs,
        };
        let path = manifest_path(anchor);
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
        Ok(())
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    output.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_written_next_to_output() {
        let dir = std::env::temp_dir().join("latstat-manifest-test");
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("x.csv");
        let mut mb = ManifestBuilder::new("measure");
        mb.config_bytes(b"cfg").seed(7).param("k", "v");
        mb.write_output(&out, b"a,b\n").unwrap();
        mb.finish(1).unwrap();
        let manifest = std::fs::read_to_string(manifest_path(&out)).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
        assert_eq!(parsed["subcommand"], "measure");
        assert_eq!(parsed["master_seed"], 7);
        let digest = parsed["outputs"]["x.csv"].as_str().unwrap();
        assert_eq!(digest, format!("sha256:{}", sha256_hex(b"a,b\n")));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
