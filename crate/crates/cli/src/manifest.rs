//! Run manifest: written before any output with status `running`, then
//! rewritten with the output hashes once the run completes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub arguments: Vec<String>,
    pub config: serde_json::Value,
    pub status: String,
    pub started_unix_s: f64,
    pub finished_unix_s: Option<f64>,
    pub outputs: Vec<OutputRecord>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn begin(subcommand: &str, arguments: Vec<String>, config: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            arguments,
            config,
            status: "running".into(),
            started_unix_s: now(),
            finished_unix_s: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(dir.join(MANIFEST_NAME), text + "\n")
    }

    pub fn read(dir: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
        serde_json::from_str(&text).map_err(io::Error::other)
    }

    /// Records `files` (relative to `dir`) and marks the run complete.
    pub fn finish(&mut self, dir: &Path, files: &[PathBuf]) -> io::Result<()> {
        self.outputs = files
            .iter()
            .map(|rel| {
                let data = fs::read(dir.join(rel))?;
                Ok(OutputRecord {
                    path: rel.to_string_lossy().into_owned(),
                    bytes: data.len() as u64,
                    sha256: sha256_hex(&data),
                })
            })
            .collect::<io::Result<_>>()?;
        self.status = "complete".into();
        self.finished_unix_s = Some(now());
        self.write(dir)
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Outcome of comparing one recomputed file with its recorded version.
#[derive(Debug, Clone, PartialEq)]
pub enum FileCheck {
    Identical,
    WithinTolerance { max_relative: f64 },
    Differs { reason: String },
}

/// Compares two CSV texts cell by cell; numeric cells may differ by
/// `tolerance` relative.
pub fn compare_csv(recorded: &str, fresh: &str, tolerance: f64) -> FileCheck {
    if recorded == fresh {
        return FileCheck::Identical;
    }
    let (a, b): (Vec<&str>, Vec<&str>) = (recorded.lines().collect(), fresh.lines().collect());
    if a.len() != b.len() {
        return FileCheck::Differs {
            reason: format!("{} rows recorded, {} recomputed", a.len(), b.len()),
        };
    }
    let mut worst: f64 = 0.0;
    for (row, (la, lb)) in a.iter().zip(&b).enumerate() {
        let (ca, cb): (Vec<&str>, Vec<&str>) = (la.split(',').collect(), lb.split(',').collect());
        if ca.len() != cb.len() {
            return FileCheck::Differs {
                reason: format!("row {row}: column count differs"),
            };
        }
        for (x, y) in ca.iter().zip(&cb) {
            if x == y {
                continue;
            }
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => {
                    let rel = (u - v).abs() / u.abs().max(v.abs()).max(f64::MIN_POSITIVE);
                    worst = worst.max(rel);
                }
                _ => {
                    return FileCheck::Differs {
                        reason: format!("row {row}: `{x}` vs `{y}`"),
                    }
                }
            }
        }
    }
    if worst <= tolerance {
        FileCheck::WithinTolerance {
            max_relative: worst,
        }
    } else {
        FileCheck::Differs {
            reason: format!("numeric difference {worst:.3e} exceeds {tolerance:.1e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn csv_comparison() {
        assert_eq!(
            compare_csv("a,b\n1,2\n", "a,b\n1,2\n", 1e-9),
            FileCheck::Identical
        );
        assert!(matches!(
            compare_csv("a\n1.0000000000\n", "a\n1.0000000001\n", 1e-9),
            FileCheck::WithinTolerance { .. }
        ));
        assert!(matches!(
            compare_csv("a\n1\n", "a\n2\n", 1e-9),
            FileCheck::Differs { .. }
        ));
        assert!(matches!(
            compare_csv("a\nok\n", "a\nlost\n", 1e-9),
            FileCheck::Differs { .. }
        ));
    }
}
