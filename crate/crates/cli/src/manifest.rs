use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    /// Path relative to the output directory.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// Quantities derived from the bath and the expansion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub n_spinful: Option<usize>,
    pub a_bar: Option<f64>,
    pub sigma_hf: Option<f64>,
    pub e_dd: Option<f64>,
    pub hf_axis: Option<[f64; 3]>,
    /// Cluster counts by size, index 0 = singletons.
    pub cluster_counts: Option<Vec<usize>>,
    /// Bands with no analyzed frequency inside them.
    pub unresolved_bands: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub derived: Derived,
    pub products: Vec<Product>,
    pub timings: Vec<Timing>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes products under one directory, hashing each.
pub(crate) struct Recorder {
    root: PathBuf,
    pub products: Vec<Product>,
    pub timings: Vec<Timing>,
    clock: Instant,
}

impl Recorder {
    pub fn new(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(CliError::io(format!("creating {}", root.display())))?;
        Ok(Recorder {
            root: root.to_path_buf(),
            products: Vec::new(),
            timings: Vec::new(),
            clock: Instant::now(),
        })
    }

    pub fn write(&mut self, file: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(CliError::io(format!("creating {}", parent.display())))?;
        }
        fs::write(&path, bytes).map_err(CliError::io(format!("writing {}", path.display())))?;
        self.products.push(Product {
            file: file.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Records the time since the previous lap under `stage`.
    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(Timing {
            stage: stage.to_string(),
            seconds: (now - self.clock).as_secs_f64(),
        });
        self.clock = now;
    }

    pub fn finish(
        self,
        command: &str,
        config: BTreeMap<String, String>,
        derived: Derived,
    ) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            derived,
            products: self.products,
            timings: self.timings,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.root.join(MANIFEST_FILE);
        fs::write(&path, text + "\n")
            .map_err(CliError::io(format!("writing {}", path.display())))?;
        Ok(manifest)
    }
}

/// Checks that every listed product exists under `root` with its hash.
pub fn verify_products(manifest: &RunManifest, root: &Path) -> Result<(), String> {
    for p in &manifest.products {
        let bytes = fs::read(root.join(&p.file)).map_err(|e| format!("{}: {e}", p.file))?;
        if sha256_hex(&bytes) != p.sha256 {
            return Err(format!("{}: hash mismatch", p.file));
        }
    }
    Ok(())
}
