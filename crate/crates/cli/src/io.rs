//! CSV ingestion of return series and CSV table output.

use lwf_core::transform::{apply_zeros_policy, ZerosOutcome, ZerosPolicy};
use lwf_core::Error as CoreError;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: u64, column: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for bad input, 2 for a numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Column chosen by header name or by zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    /// Digits select by position, anything else by name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        }
    }
}

/// A univariate return series; the zeros policy is recorded here and
/// applied by consumers that need strictly nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsSeries {
    pub timestamps: Option<Vec<String>>,
    pub values: Vec<f64>,
    pub zeros_policy: ZerosPolicy,
}

impl ReturnsSeries {
    pub fn new(values: Vec<f64>, zeros_policy: ZerosPolicy) -> Self {
        Self { timestamps: None, values, zeros_policy }
    }

    pub fn without_zeros(&self) -> Result<ZerosOutcome, CliError> {
        Ok(apply_zeros_policy(&self.values, self.zeros_policy)?)
    }
}

fn resolve(selector: &ColumnSelector, headers: Option<&csv::StringRecord>) -> Result<(usize, String), CliError> {
    match selector {
        ColumnSelector::Index(i) => {
            let name = headers.and_then(|h| h.get(*i)).map(str::to_string).unwrap_or_else(|| i.to_string());
            Ok((*i, name))
        }
        ColumnSelector::Name(name) => {
            let h = headers.ok_or_else(|| {
                CliError::Usage(format!("column '{name}' selected by name but the file has no header"))
            })?;
            h.iter()
                .position(|c| c.trim() == name)
                .map(|i| (i, name.clone()))
                .ok_or_else(|| CliError::Usage(format!("column '{name}' not found in header")))
        }
    }
}

/// Reads one numeric column (and optionally a timestamp column) from a
/// CSV file. Row numbers in errors are 1-based file lines.
pub fn ingest_csv(
    path: &Path,
    column: &ColumnSelector,
    has_header: bool,
    date_column: Option<&ColumnSelector>,
    zeros_policy: ZerosPolicy,
) -> Result<ReturnsSeries, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let headers = if has_header { Some(reader.headers()?.clone()) } else { None };
    let (col, col_name) = resolve(column, headers.as_ref())?;
    let date = date_column.map(|d| resolve(d, headers.as_ref())).transpose()?;
    let mut values = Vec::new();
    let mut stamps = date.as_ref().map(|_| Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let row = i as u64 + 1 + u64::from(has_header);
        let rec = rec.map_err(|e| CliError::Parse { row, column: col_name.clone(), message: e.to_string() })?;
        let cell = rec.get(col).ok_or_else(|| CliError::Parse {
            row,
            column: col_name.clone(),
            message: "missing field".into(),
        })?;
        let v: f64 = cell.trim().parse().map_err(|_| CliError::Parse {
            row,
            column: col_name.clone(),
            message: format!("'{cell}' is not a number"),
        })?;
        values.push(v);
        if let (Some((dc, _)), Some(st)) = (&date, stamps.as_mut()) {
            st.push(rec.get(*dc).unwrap_or("").to_string());
        }
    }
    if values.is_empty() {
        return Err(CliError::Usage(format!("{} contains no data rows", path.display())));
    }
    Ok(ReturnsSeries { timestamps: stamps, values, zeros_policy })
}

/// Formats a number for CSV output: plain decimal for moderate
/// magnitudes, exponent notation otherwise. Output is deterministic.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if v != 0.0 && (v.abs() >= 1e6 || v.abs() < 1e-4) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// In-memory CSV table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}
