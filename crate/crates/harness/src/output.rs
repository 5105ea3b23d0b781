//! Output formatting and atomic file writes.
//!
//! Floats are written as `{:.16e}` (17 significant digits, round-trip
//! exact). CSV files open with a `# config_hash=<hex>` comment line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, HarnessResult};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// so readers never see a partial file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(bytes).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    fs::rename(&tmp, path).map_err(io)
}

/// A CSV table assembled in memory; rows are written in insertion order.
pub struct CsvTable {
    config_hash: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(config_hash: &str, header: &[&'static str]) -> Self {
        Self { config_hash: config_hash.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> HarnessResult<Vec<u8>> {
        let mut out = format!("# config_hash={}\n", self.config_hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let csv_err = |e: csv::Error| HarnessError::Io(e.to_string());
            w.write_record(&self.header).map_err(csv_err)?;
            for row in &self.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> HarnessResult<()> {
        write_atomic(path, &self.to_bytes()?)
    }
}

/// Serializes `value` next to a `config_hash` field.
#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    value: &'a T,
}

pub fn stamped_json<T: Serialize>(config_hash: &str, value: &T) -> HarnessResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Stamped { config_hash, value })
        .map_err(|e| HarnessError::Io(format!("json: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_json<T: Serialize>(path: &Path, config_hash: &str, value: &T) -> HarnessResult<()> {
    write_atomic(path, &stamped_json(config_hash, value)?)
}

/// Reads a stamped CSV back: the hash line, then header and rows.
pub fn read_csv(path: &Path) -> HarnessResult<(String, Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let hash = first
        .strip_prefix("# config_hash=")
        .ok_or_else(|| HarnessError::Io(format!("{}: missing config hash line", path.display())))?
        .to_string();
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers().map_err(|e| HarnessError::Io(e.to_string()))?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok((hash, header, rows))
}
