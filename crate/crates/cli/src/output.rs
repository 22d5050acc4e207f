//! Artifact writing: every file is written to a temporary sibling and renamed.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io("output", format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// Names of the artifacts written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let err = |e: std::io::Error| CliError::io("output", format!("{name}: {e}"));
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(err)?;
        tmp.write_all(bytes).map_err(err)?;
        tmp.as_file().sync_all().map_err(err)?;
        tmp.persist(self.dir.join(name)).map_err(|e| err(e.error))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<D: Serialize>(&mut self, name: &str, doc: &D) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(doc).map_err(|e| CliError::io("output", e))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_csv<R: Serialize>(&mut self, name: &str, header: &[String], rows: &[R]) -> Result<(), CliError> {
        let err = |e: csv::Error| CliError::io("output", format!("{name}: {e}"));
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.serialize(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io("output", e.to_string()))?;
        self.write_bytes(name, &bytes)
    }
}

/// Column names `prefix_1 .. prefix_n`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}
