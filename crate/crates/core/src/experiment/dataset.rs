use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Fixed float formatting for CSV cells: integers print plainly, everything
/// else in shortest round-trip scientific notation.
pub fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

/// A table of named numeric columns plus a metadata object.
///
/// Written as `<id>.csv` and `<id>.json`; the JSON embeds the CSV's content
/// hash (SHA-256 over a git-style `blob <len>\0` header and the bytes).
#[derive(Debug, Clone, PartialEq)]
pub struct FigureDataset {
    pub id: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Value,
}

impl FigureDataset {
    pub fn new(id: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            id: id.into(),
            columns,
            rows: Vec::new(),
            metadata: json!({}),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(format!(
                "row has {} cells for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_value(v)))?;
        }
        w.into_inner().map_err(|e| Error::invalid(format!("csv buffer: {e}")))
    }

    pub fn content_hash(csv: &[u8]) -> String {
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", csv.len()).as_bytes());
        h.update(csv);
        format!("sha256:{}", hex::encode(h.finalize()))
    }

    /// Metadata as written: the user metadata plus id, columns, row count and hash.
    pub fn metadata_json(&self) -> Result<Value> {
        let csv = self.to_csv()?;
        let mut meta = match &self.metadata {
            Value::Object(m) => m.clone(),
            Value::Null => Default::default(),
            other => return Err(Error::invalid(format!("metadata must be an object, got {other}"))),
        };
        meta.insert("id".into(), json!(self.id));
        meta.insert("columns".into(), json!(self.columns));
        meta.insert("rows".into(), json!(self.rows.len()));
        meta.insert("content_hash".into(), json!(Self::content_hash(&csv)));
        Ok(Value::Object(meta))
    }

    pub fn paths(dir: &Path, id: &str) -> (PathBuf, PathBuf) {
        (dir.join(format!("{id}.csv")), dir.join(format!("{id}.json")))
    }

    /// Writes both files, creating `dir` if needed.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let (csv_path, meta_path) = Self::paths(dir, &self.id);
        let csv = self.to_csv()?;
        std::fs::write(&csv_path, &csv).map_err(|e| Error::io(&csv_path, e))?;
        let mut meta = serde_json::to_string_pretty(&self.metadata_json()?)?;
        meta.push('\n');
        std::fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
        Ok((csv_path, meta_path))
    }

    /// Re-derives the content hash of `<id>.csv` and compares it with the
    /// one recorded in `<id>.json`. Also checks that every row is complete.
    pub fn verify(dir: &Path, id: &str) -> Result<bool> {
        let (csv_path, meta_path) = Self::paths(dir, id);
        let csv = std::fs::read(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        let meta_s = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: Value = serde_json::from_str(&meta_s)?;
        let recorded = meta
            .get("content_hash")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::invalid(format!("{} has no content_hash", meta_path.display())))?;
        let mut reader = csv::ReaderBuilder::new().from_reader(csv.as_slice());
        let width = reader.headers()?.len();
        let mut rows = 0;
        for rec in reader.records() {
            if rec?.len() != width {
                return Ok(false);
            }
            rows += 1;
        }
        let rows_ok = meta.get("rows").and_then(Value::as_u64) == Some(rows);
        Ok(rows_ok && recorded == Self::content_hash(&csv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_format() {
        assert_eq!(format_value(200.0), "200");
        assert_eq!(format_value(-3.0), "-3");
        assert_eq!(format_value(0.5), "5e-1");
        assert_eq!(format_value(7.17e-4), "7.17e-4");
        assert_eq!(format_value(1e300), "1e300");
        for v in [0.1, 1.0 / 3.0, 2.5e-17, 123456.789] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn write_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = FigureDataset::new("t", vec!["x".into(), "y".into()]);
        d.push_row(vec![1.0, 0.25]).unwrap();
        d.push_row(vec![2.0, 0.5]).unwrap();
        assert!(d.push_row(vec![3.0]).is_err());
        d.metadata = json!({"seed": 3});
        d.write(dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(csv, "x,y\n1,2.5e-1\n2,5e-1\n");
        assert!(FigureDataset::verify(dir.path(), "t").unwrap());
        std::fs::write(dir.path().join("t.csv"), "x,y\n1,2.5e-1\n2,6e-1\n").unwrap();
        assert!(!FigureDataset::verify(dir.path(), "t").unwrap());
    }

    #[test]
    fn git_style_hash() {
        // `git hash-object --object-format=sha256` of an empty blob
        assert_eq!(
            FigureDataset::content_hash(b""),
            "sha256:473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}
