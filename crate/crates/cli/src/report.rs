//! summary.json, CSV writers and the one-line-per-check console listing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use blochlat::verify::Check;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct CheckRow<'a> {
    pub name: &'a str,
    pub anchor: &'a str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<&'a str>,
}

impl<'a> From<&'a Check> for CheckRow<'a> {
    fn from(c: &'a Check) -> Self {
        Self {
            name: &c.name,
            anchor: c.anchor,
            lhs: c.lhs,
            rhs: c.rhs,
            pass: c.pass,
            witness: c.witness.as_deref(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub checks: Vec<CheckRow<'a>>,
    /// Left out of reproducible runs so that reports compare byte for byte.
    pub elapsed_ms: Option<u64>,
}

pub fn write_summary(dir: &Path, checks: &[Check], elapsed_ms: Option<u64>) -> CliResult<PathBuf> {
    let path = dir.join("summary.json");
    let summary = Summary {
        checks: checks.iter().map(CheckRow::from).collect(),
        elapsed_ms,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary is plain data");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io("write", &path, e))?;
    Ok(path)
}

pub fn line(c: &Check) -> String {
    let status = if c.pass { "PASS" } else { "FAIL" };
    format!("{status} [{}] {}: {:e} <= {:e}", c.anchor, c.name, c.lhs, c.rhs)
}

/// A CSV file written row by row.
pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(dir: &Path, name: &str, header: &[String]) -> CliResult<Self> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io("create", &path, e))?;
        let mut out = Self {
            writer: csv::Writer::from_writer(BufWriter::new(file)),
            path,
        };
        out.row(header)?;
        Ok(out)
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| self.csv_error(e))
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.writer.flush().map_err(|e| CliError::io("write", &self.path, e))?;
        let inner = self.writer.into_inner().map_err(|e| CliError::io("write", &self.path, e.into_error()))?;
        inner
            .into_inner()
            .map_err(|e| CliError::io("write", &self.path, e.into_error()))?
            .flush()
            .map_err(|e| CliError::io("write", &self.path, e))?;
        Ok(self.path)
    }

    fn csv_error(&self, e: csv::Error) -> CliError {
        let io = match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        };
        CliError::io("write", &self.path, io)
    }
}

/// Shortest decimal form that reads back to the same f64.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
