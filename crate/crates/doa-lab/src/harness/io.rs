//! CSV and JSON emission. Every CSV starts with the schema comment line; all
//! numeric formatting is fixed-width so equal runs are byte-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// First line of every CSV artifact.
pub const SCHEMA_LINE: &str = "# doa-lab schema v1";

/// Schema string echoed into JSON outputs.
pub const SCHEMA_VERSION: &str = "doa-lab schema v1";

pub(crate) struct CsvWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl CsvWriter {
    pub fn create(path: &Path, columns: &[&str]) -> Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{SCHEMA_LINE}")?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self { out, path: path.to_path_buf() })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

pub(crate) fn fmt_angle(v: f64) -> String {
    format!("{v:.4}")
}

pub(crate) fn fmt_db(v: f64) -> String {
    format!("{v:.6}")
}

pub(crate) fn fmt_beta(v: f64) -> String {
    format!("{v:.9}")
}

pub(crate) fn fmt_alpha(v: f64) -> String {
    format!("{v:.4}")
}

pub(crate) fn fmt_gsnr(v: f64) -> String {
    format!("{v:.2}")
}

pub(crate) fn fmt_prob(v: f64) -> String {
    format!("{v:.6}")
}

/// Run manifest written next to every command's outputs. `created_unix_s`
/// and `wall_time_s` are the only non-deterministic fields and live here
/// only; CSV bodies stay byte-identical across equal-seed runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub master_seed: u64,
    pub wall_time_s: f64,
    pub created_unix_s: u64,
    pub outputs: Vec<String>,
    pub notes: serde_json::Value,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, config: serde_json::Value) -> Self {
        Self {
            schema: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            master_seed,
            wall_time_s: 0.0,
            created_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: Vec::new(),
            notes: serde_json::Value::Null,
            config,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("run_manifest.json");
        let mut out = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut out, self)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e))?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(path)
    }
}
