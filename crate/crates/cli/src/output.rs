//! CSV tables, JSON Lines reports and their metadata files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

/// Writes `rows` as CSV; the header comes from the row type's field names.
fn create(path: &Path) -> Result<File, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), Failure> {
    let mut w = BufWriter::new(create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
pub struct Meta<'a> {
    pub command: &'a str,
    pub config_hash: &'a str,
    pub grid_id: String,
    pub n_modes: usize,
    pub n_max: usize,
    pub n_states: usize,
    pub seed: u64,
    pub tol: f64,
    pub version: &'static str,
    /// The only field that differs between identical runs.
    pub timestamp: String,
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_meta(out: &Path, meta: &Meta) -> Result<(), Failure> {
    let mut w = BufWriter::new(create(&meta_path(out))?);
    serde_json::to_writer_pretty(&mut w, meta).map_err(std::io::Error::other)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
