//! Output files, their hashes and the run manifest.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

/// One CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text with a header line and `\n` endings.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match *c {
                Cell::Float(v) => format_float(v),
                Cell::Int(v) => v.to_string(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub config: std::collections::BTreeMap<String, f64>,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Files written by one run. Names are `<stem><suffix>`; the location is a
/// directory, or the parent of `out` when `out` names a `.csv` file.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    written: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new(out: &Path, default_stem: &str) -> Result<Self, OutputError> {
        let (dir, stem) = match out.extension().and_then(|e| e.to_str()) {
            Some("csv") => (
                out.parent().map(Path::to_path_buf).unwrap_or_default(),
                out.file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or(default_stem)
                    .to_owned(),
            ),
            _ => (out.to_path_buf(), default_stem.to_owned()),
        };
        let dir = if dir.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            dir
        };
        fs::create_dir_all(&dir).map_err(|source| OutputError {
            path: dir.clone(),
            source,
        })?;
        Ok(Self {
            dir,
            stem,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{}", self.stem, suffix))
    }

    fn write(&mut self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, OutputError> {
        let path = self.path_for(suffix);
        let file_name = path
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        // Record before writing so a failed write is still cleaned up.
        self.written.push((file_name, String::new()));
        let result = fs::File::create(&path).and_then(|mut f| f.write_all(bytes));
        result.map_err(|source| OutputError {
            path: path.clone(),
            source,
        })?;
        if let Some(last) = self.written.last_mut() {
            last.1 = sha256_hex(bytes);
        }
        Ok(path)
    }

    pub fn write_csv(
        &mut self,
        suffix: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<Cell>>,
    ) -> Result<PathBuf, OutputError> {
        let text = csv_text(header, rows);
        self.write(&format!("{suffix}.csv"), text.as_bytes())
    }

    pub fn write_json(
        &mut self,
        suffix: &str,
        value: &impl Serialize,
    ) -> Result<PathBuf, OutputError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| OutputError {
            path: self.path_for(suffix),
            source: io::Error::other(e),
        })?;
        text.push('\n');
        self.write(&format!("{suffix}.json"), text.as_bytes())
    }

    /// Writes `<stem>.manifest.json` covering every file written so far.
    pub fn finish(
        mut self,
        config: &Config,
        command_line: &[String],
    ) -> Result<RunManifest, OutputError> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command_line: command_line.to_vec(),
            config: config.snapshot(),
            outputs: self
                .written
                .iter()
                .map(|(file, sha256)| OutputRecord {
                    file: file.clone(),
                    sha256: sha256.clone(),
                })
                .collect(),
        };
        self.write_json(".manifest", &manifest)?;
        self.written.clear();
        Ok(manifest)
    }

    /// Removes every file written so far.
    pub fn discard(mut self) {
        self.remove_all();
    }

    fn remove_all(&mut self) {
        for (file, _) in self.written.drain(..) {
            let _ = fs::remove_file(self.dir.join(file));
        }
    }
}

impl Drop for OutputSet {
    /// An output set dropped before `finish` belongs to a failed run.
    fn drop(&mut self) {
        self.remove_all();
    }
}
