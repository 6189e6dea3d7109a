//! In-memory result tables and their CSV form.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// Formats a value for a CSV cell. Floats use the shortest representation that
/// parses back to the same bits, so reruns give identical bytes.
pub trait Field {
    fn field(&self) -> String;
}

impl Field for f64 {
    fn field(&self) -> String {
        let a = self.abs();
        if *self != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
            format!("{self:e}")
        } else {
            format!("{self}")
        }
    }
}

macro_rules! display_field {
    ($($t:ty),*) => {$(
        impl Field for $t {
            fn field(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
display_field!(usize, u64, u32, i64, bool, str, String);

impl<T: Field + ?Sized> Field for &T {
    fn field(&self) -> String {
        (**self).field()
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => {
        vec![$($crate::table::Field::field(&$v)),*]
    };
}

/// How `report` aggregates a table: rows sharing the `group_by` cells are
/// pooled and each `values` column gets a mean and a sample standard deviation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Aggregation {
    pub group_by: Vec<String>,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File name, e.g. `results.csv`.
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub aggregation: Option<Aggregation>,
    /// Comment lines written above the header, each prefixed by `# `.
    pub preamble: Vec<String>,
}

impl Table {
    pub fn new(file: &str, columns: &[&str]) -> Self {
        Self {
            file: file.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            aggregation: None,
            preamble: Vec::new(),
        }
    }

    pub fn aggregate(mut self, group_by: &[&str], values: &[&str]) -> Self {
        for c in group_by.iter().chain(values) {
            assert!(self.columns.iter().any(|k| k == c), "unknown column {c}");
        }
        self.aggregation = Some(Aggregation {
            group_by: group_by.iter().map(|c| c.to_string()).collect(),
            values: values.iter().map(|c| c.to_string()).collect(),
        });
        self
    }

    pub fn with_preamble(mut self, line: &str) -> Self {
        self.preamble.push(line.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.file);
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Vec<String>>) {
        for r in rows {
            self.push(r);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for line in &self.preamble {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Writes the table and returns the SHA-256 of the bytes written.
    pub fn write(&self, dir: &Path) -> Result<String> {
        let path = dir.join(&self.file);
        let bytes = self.to_bytes();
        std::fs::write(&path, &bytes).map_err(LabError::io(&path))?;
        Ok(sha256_hex(&bytes))
    }

    /// Reads a table written by [`write`](Self::write); comment lines are skipped.
    pub fn read(path: &Path) -> Result<Table> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(LabError::csv(path))?;
        let columns = r.headers().map_err(LabError::csv(path))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(LabError::csv(path))?.iter().map(String::from).collect());
        }
        let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Table { file, columns, rows, aggregation: None, preamble: Vec::new() })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
