//! Run manifest: what was run, from which files, with which content.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ManifestRun {
    pub name: String,
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ManifestSpec {
    pub start: f64,
    pub stop: f64,
    pub dt: f64,
    pub method: String,
    pub save_interval: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub spec: ManifestSpec,
    pub model_files: Vec<ManifestFile>,
    pub runs: Vec<ManifestRun>,
}

pub fn sha256_hex(data: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
