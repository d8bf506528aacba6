//! Staged output files, committed together or not at all.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use coupler_core::io::{write_table, TableMeta};
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::error::CliError;

struct Staged {
    name: String,
    bytes: Vec<u8>,
    schema: String,
    rows: usize,
}

/// Artifacts are built in memory, then written to temp files in the output
/// directory and renamed into place once every file is on disk.
pub struct Artifacts {
    dir: PathBuf,
    staged: Vec<Staged>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        }
    }

    /// Adds `<stem>.csv` and its `<stem>.meta.json` sidecar.
    pub fn table(&mut self, stem: &str, meta: TableMeta, rows: Vec<Vec<f64>>) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        let n = rows.len();
        write_table(&mut bytes, &meta.header(), rows)?;
        let meta = meta.with("rows", n);
        self.staged.push(Staged {
            name: format!("{stem}.csv"),
            bytes,
            schema: meta.schema.clone(),
            rows: n,
        });
        self.json(&format!("{stem}.meta"), "meta/1", &serde_json::to_value(&meta)?)
    }

    pub fn json(&mut self, stem: &str, schema: &str, value: &Value) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.staged.push(Staged {
            name: format!("{stem}.json"),
            bytes,
            schema: schema.into(),
            rows: 0,
        });
        Ok(())
    }

    pub fn binary(&mut self, name: &str, schema: &str, bytes: Vec<u8>) {
        self.staged.push(Staged {
            name: name.into(),
            bytes,
            schema: schema.into(),
            rows: 0,
        });
    }

    pub fn names(&self) -> Vec<String> {
        self.staged.iter().map(|s| s.name.clone()).collect()
    }

    /// Writes everything and prints one JSON summary line per file.
    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(&self.dir)?;
        let mut temps = Vec::with_capacity(self.staged.len());
        for s in &self.staged {
            let mut tmp = NamedTempFile::new_in(&self.dir)?;
            tmp.write_all(&s.bytes)?;
            tmp.as_file().sync_all()?;
            temps.push(tmp);
        }
        let mut paths = Vec::new();
        for (tmp, s) in temps.into_iter().zip(&self.staged) {
            let path = self.dir.join(&s.name);
            tmp.persist(&path).map_err(|e| CliError::from(e.error))?;
            println!(
                "{}",
                json!({
                    "artifact": path.display().to_string(),
                    "schema": s.schema,
                    "rows": s.rows,
                    "bytes": s.bytes.len(),
                })
            );
            paths.push(path);
        }
        Ok(paths)
    }
}
