//! CSV and manifest emission. Everything written is deterministic for a
//! fixed config and seed, and every number is checked finite before it
//! lands in a file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

pub struct CsvFile {
    path: PathBuf,
    body: String,
}

impl CsvFile {
    pub fn new(
        dir: &Path,
        name: &str,
        provenance: &[(String, String)],
        header: &[&str],
    ) -> CsvFile {
        let mut body = String::new();
        for (k, v) in provenance {
            let _ = writeln!(body, "# {k}: {v}");
        }
        let _ = writeln!(body, "{}", header.join(","));
        CsvFile { path: dir.join(name), body }
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<(), String> {
        let mut parts = Vec::with_capacity(cells.len());
        for c in cells {
            match c {
                Cell::Int(v) => parts.push(v.to_string()),
                Cell::Float(v) => {
                    if !v.is_finite() {
                        return Err(format!("refusing to write non-finite value {v} to CSV"));
                    }
                    parts.push(format!("{v}"));
                }
                Cell::Text(s) => parts.push(s.clone()),
            }
        }
        let _ = writeln!(self.body, "{}", parts.join(","));
        Ok(())
    }

    pub fn write(self) -> std::io::Result<PathBuf> {
        std::fs::write(&self.path, self.body)?;
        Ok(self.path)
    }
}

/// The run manifest: resolved parameters, measured quantities, notes.
pub struct Manifest {
    experiment: String,
    digest: String,
    seed: Option<u64>,
    resolved: serde_json::Value,
    measured: serde_json::Map<String, serde_json::Value>,
    notes: Vec<String>,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(experiment: &str, digest: &str, seed: Option<u64>, resolved: serde_json::Value) -> Manifest {
        Manifest {
            experiment: experiment.to_string(),
            digest: digest.to_string(),
            seed,
            resolved,
            measured: serde_json::Map::new(),
            notes: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn measure(&mut self, key: &str, value: serde_json::Value) {
        self.measured.insert(key.to_string(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(self, dir: &Path) -> std::io::Result<PathBuf> {
        let doc = json!({
            "tool": format!("schrodsim {}", env!("CARGO_PKG_VERSION")),
            "experiment": self.experiment,
            "config_sha256": self.digest,
            "seed": self.seed,
            "threads": crate::thread_count(),
            "resolved": self.resolved,
            "measured": serde_json::Value::Object(self.measured),
            "notes": self.notes,
            "outputs": self.outputs,
        });
        let path = dir.join(format!("{}_manifest.json", self.experiment));
        std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("manifest serializes"))?;
        Ok(path)
    }
}

pub fn provenance(experiment: &str, digest: &str, seed: Option<u64>) -> Vec<(String, String)> {
    let mut rows = vec![
        ("tool".to_string(), format!("schrodsim {}", env!("CARGO_PKG_VERSION"))),
        ("experiment".to_string(), experiment.to_string()),
        ("config_sha256".to_string(), digest.to_string()),
    ];
    if let Some(s) = seed {
        rows.push(("seed".to_string(), s.to_string()));
    }
    rows
}
