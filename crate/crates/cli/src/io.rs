//! File plumbing: strict CSV tables, JSON artifacts and run sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, Result};

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a numeric CSV whose header must equal `columns` exactly.
pub fn read_table(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let csv_err = |source| CliError::Csv {
        path: display(path),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].trim().is_empty()) {
        return Err(CliError::Usage(format!(
            "{}: empty CSV, expected header {}",
            display(path),
            columns.join(",")
        )));
    }
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != columns {
        return Err(CliError::Usage(format!(
            "{}: header is {:?}, expected {}",
            display(path),
            got.join(","),
            columns.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    CliError::Usage(format!(
                        "{}: row {}: {field:?} is not a finite number",
                        display(path),
                        i + 2
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", display(path))));
    }
    Ok(rows)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: display(path),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: display(path),
        source,
    })
}

/// Destination of a command's primary output; stdout when no path is given.
pub struct Output {
    pub path: Option<PathBuf>,
}

impl Output {
    fn write_bytes(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io {
                path: display(p),
                source,
            }),
            None => std::io::stdout()
                .write_all(bytes)
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                }),
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
            path: self.label(),
            source,
        })?;
        text.push('\n');
        self.write_bytes(text.as_bytes())
    }

    /// Writes a comma-separated, LF-terminated table.
    pub fn table(&self, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |source| CliError::Csv {
            path: self.label(),
            source,
        };
        writer.write_record(header).map_err(csv_err)?;
        for row in rows {
            writer.write_record(row).map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Usage(format!("{}: {e}", self.label())))?;
        self.write_bytes(&bytes)
    }

    /// Run metadata next to the output file, `<output>.meta.json`.
    pub fn sidecar<T: Serialize>(&self, meta: &T) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut name = path.as_os_str().to_owned();
        name.push(".meta.json");
        Output {
            path: Some(PathBuf::from(name)),
        }
        .json(meta)
    }

    fn label(&self) -> String {
        self.path
            .as_deref()
            .map_or_else(|| "<stdout>".to_string(), display)
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v}")
}
