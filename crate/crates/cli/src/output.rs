//! CSV artifacts with a `#`-prefixed metadata header.

use std::path::{Path, PathBuf};

use pce_hinf::linalg::Mat;

use crate::error::{CliError, Result};

/// Ordered `key: value` lines written ahead of every CSV body.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata(Vec<(String, String)>);

impl Metadata {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn with(&self, key: &str, value: impl ToString) -> Self {
        let mut m = self.clone();
        m.push(key, value);
        m
    }

    fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }
}

pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv_string(meta: &Metadata, header: Option<&[String]>, rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).expect("in-memory write");
    }
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 CSV");
    meta.render() + &body
}

pub fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn write_csv(path: &Path, meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_text(path, &csv_string(meta, Some(&header), rows))
}

/// Headerless numeric matrix.
pub fn write_matrix(path: &Path, meta: &Metadata, m: &Mat) -> Result<PathBuf> {
    let rows: Vec<Vec<String>> = m.row_iter().map(|r| r.iter().map(|&v| num(v)).collect()).collect();
    write_text(path, &csv_string(meta, None, &rows))
}

/// Reads a headerless numeric CSV matrix, skipping `#` lines.
pub fn read_matrix(path: &Path) -> Result<Mat> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text).map_err(|m| CliError::schema(path.display().to_string(), m))
}

pub fn parse_matrix(text: &str) -> std::result::Result<Mat, String> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| format!("row {i}: {s:?} is not a number")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err("empty matrix".into());
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err("ragged matrix".into());
    }
    Ok(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}
