use std::fs;
use std::path::{Path, PathBuf};

use qcbecker::bounds::{angular_derivative_bound, curvature_bound, explicit_constants};
use qcbecker::construction::ConstructionReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// One emitted file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Contents of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub version: String,
    /// Hash of the bound constants on a fixed grid of `q`; changes whenever a formula does.
    pub formula_hash: String,
    pub config: RunConfig,
    pub report: ConstructionReport,
}

/// Contents of `manifest.json`: every other emitted file with its hash.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub formula_hash: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Fingerprint of the frozen closed forms.
pub fn formula_hash() -> String {
    let mut h = Sha256::new();
    for q in [0.01f64, 0.1, 0.2, 0.3] {
        let table = explicit_constants(q).expect("grid inside the domain");
        h.update(serde_json::to_vec(&table).expect("constants serialize"));
        let (_, _, kappa) = curvature_bound(q, 2.0).expect("grid inside the domain");
        h.update(kappa.to_le_bytes());
    }
    h.update(angular_derivative_bound(1.0f64, 0.5).expect("valid arguments").to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Writes files into a directory and records them for the manifest.
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        self.files.push(FileEntry { name: name.to_string(), bytes: data.len() as u64, sha256: sha256_hex(data) });
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(self) -> Result<Manifest, CliError> {
        let manifest = Manifest { version: version(), formula_hash: formula_hash(), files: self.files };
        let text = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        Ok(manifest)
    }
}
