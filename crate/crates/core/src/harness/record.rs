//! Per-run tables and their CSV form.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::scenario::Scenario;
use crate::error::{Error, Result};

/// One simulated run: named columns of equal length, `t` first.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario: String,
    /// Resolved configuration that produced the run.
    pub config: Scenario,
    /// Output file name, if the scenario names one.
    pub output: Option<String>,
    columns: Vec<String>,
    data: Vec<Vec<f64>>,
    /// Headline numbers for `--summary`.
    pub summary: Vec<(String, f64)>,
}

impl RunRecord {
    pub fn new(config: Scenario, columns: Vec<String>, data: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != data.len() || columns.first().map(String::as_str) != Some("t") {
            return Err(Error::Dimension(
                "record needs a leading `t` column and one data vector per column".into(),
            ));
        }
        let rows = data[0].len();
        if data.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("record columns differ in length".into()));
        }
        if data[0].windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Dimension(
                "record times must increase strictly".into(),
            ));
        }
        Ok(Self {
            scenario: config.name.clone(),
            output: config.output.clone(),
            config,
            columns,
            data,
            summary: Vec::new(),
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.data[i].as_slice())
    }

    pub fn row_count(&self) -> usize {
        self.data[0].len()
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.data.iter().map(|c| c[k]).collect()
    }

    /// Values of the columns whose names start with `prefix`, at row `k`.
    pub fn prefixed(&self, prefix: &str, k: usize) -> Vec<f64> {
        self.columns
            .iter()
            .zip(&self.data)
            .filter(|(n, _)| n.starts_with(prefix))
            .map(|(_, c)| c[k])
            .collect()
    }

    /// Drops every row, keeping the header.
    pub fn truncated(mut self) -> Self {
        self.data.iter_mut().for_each(Vec::clear);
        self
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(record: &RunRecord, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&record.columns)?;
    for k in 0..record.row_count() {
        w.write_record(record.data.iter().map(|c| format_value(c[k])))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(record: &RunRecord, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(record, file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_csv_string(record: &RunRecord) -> String {
    let mut buf = Vec::new();
    write_csv(record, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii output")
}

/// Header and rows of an emitted file.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|e| {
                    Error::Dimension(format!("{}: bad number `{s}`: {e}", path.display()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
