//! Run manifests: every file-writing subcommand records its flags, seed,
//! and input/output digests next to its outputs. Re-running with the same
//! flags reproduces the outputs byte for byte; the manifest itself carries
//! the wall time and so is the one non-reproducible artifact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::formats::FormatError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub artifact_version: String,
    pub seed: Option<u64>,
    pub flags: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_seconds: f64,
}

/// Collects manifest fields while a command runs.
pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str, seed: Option<u64>) -> Self {
        ManifestBuilder {
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                artifact_version: ARTIFACT_VERSION.to_string(),
                seed,
                flags: BTreeMap::new(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                wall_time_seconds: 0.0,
            },
            started: Instant::now(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.manifest.flags.insert(name.to_string(), value.to_string());
        self
    }

    pub fn flag_opt(&mut self, name: &str, value: Option<impl ToString>) -> &mut Self {
        if let Some(v) = value {
            self.flag(name, v);
        }
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, FormatError> {
        let digest = sha256_file(path)?;
        self.manifest.inputs.insert(path.display().to_string(), digest);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self, FormatError> {
        let digest = sha256_file(path)?;
        self.manifest.outputs.insert(path.display().to_string(), digest);
        Ok(self)
    }

    /// Writes the manifest next to the outputs.
    pub fn write(mut self, path: &Path) -> Result<(), FormatError> {
        self.manifest.wall_time_seconds = self.started.elapsed().as_secs_f64();
        let file = File::create(path).map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, &self.manifest)
            .map_err(|e| FormatError::Invalid { path: path.to_path_buf(), message: e.to_string() })?;
        w.write_all(b"\n")
            .map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })?;
        w.flush()
            .map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })
    }
}

pub fn sha256_file(path: &Path) -> Result<String, FormatError> {
    let mut file = File::open(path).map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file
            .read(&mut buf)
            .map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex_string(&hasher.finalize()))
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Path of the manifest that belongs to an output file.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
