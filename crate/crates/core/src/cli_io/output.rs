use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Round-trippable float text.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A CSV table assembled in memory.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResultFile {
    pub file: String,
    pub sha256: String,
}

/// Provenance record written next to every command's results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub config: String,
    pub packing: String,
    pub store_fingerprint: Option<String>,
    pub results: Vec<ResultFile>,
    pub notes: Vec<String>,
}

/// Collects result files of one run under an output directory.
#[derive(Debug)]
pub struct RunOutput {
    dir: PathBuf,
    manifest: RunManifest,
}

impl RunOutput {
    pub fn new(dir: &Path, command: &str, resolved_config: &str, packing: String) -> Self {
        Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                config_sha256: sha256_hex(resolved_config.as_bytes()),
                config: resolved_config.into(),
                packing,
                store_fingerprint: None,
                results: Vec::new(),
                notes: Vec::new(),
            },
        }
    }

    pub fn set_fingerprint(&mut self, fp: [u8; 32]) {
        self.manifest.store_fingerprint = Some(hex::encode(fp));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.manifest.notes.push(text.into());
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.manifest.results.push(ResultFile {
            file: name.into(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, csv: &Csv) -> Result<PathBuf> {
        self.write(name, csv.as_str().as_bytes())
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(self) -> Result<RunManifest> {
        let mut json = serde_json::to_string_pretty(&self.manifest).map_err(std::io::Error::from)?;
        json.push('\n');
        write_atomic(&self.dir.join("manifest.json"), json.as_bytes())?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn manifest_lists_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = RunOutput::new(dir.path(), "count", "a = 1\n", "strip".into());
        let mut csv = Csv::new(&["t", "count"]);
        csv.row(&[fmt_f64(0.5), "3".into()]);
        out.write_csv("count.csv", &csv).unwrap();
        let m = out.finish().unwrap();
        assert_eq!(m.results[0].sha256, sha256_hex(b"t,count\n5.0000000000000000e-1,3\n"));
        let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(text.contains("\"command\": \"count\""));
        assert!(!dir.path().join("count.csv.tmp").exists());
    }
}
