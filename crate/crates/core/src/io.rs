//! Plain-text tables shared by every serializer: comma-separated, one header
//! row, LF line endings, `# key=value` metadata lines before the header and
//! floats printed with 17 significant digits so that reading and writing
//! again reproduces the file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with keys in sorted order and a trailing newline. Parsing the
/// output into a `serde_json::Value` and writing it again with this function
/// reproduces it byte for byte.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes to JSON");
    let mut out = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    out.push('\n');
    out
}

/// A numeric table with ordered metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut table = Table::default();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            if let Some(meta) = line.strip_prefix("# ") {
                if header_seen {
                    return Err(Error::Format(format!("line {}: metadata after header", lineno + 1)));
                }
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("line {}: malformed metadata", lineno + 1)))?;
                table.metadata.push((k.to_string(), v.to_string()));
            } else if !header_seen {
                table.columns = line.split(',').map(str::to_string).collect();
                header_seen = true;
            } else if !line.is_empty() {
                let row = line
                    .split(',')
                    .map(|f| f.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
                if row.len() != table.columns.len() {
                    return Err(Error::Format(format!(
                        "line {}: {} fields, expected {}",
                        lineno + 1,
                        row.len(),
                        table.columns.len()
                    )));
                }
                table.rows.push(row);
            }
        }
        if !header_seen {
            return Err(Error::Format("missing header row".into()));
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text)
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip_is_byte_identical(rows in proptest::collection::vec(proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO, 3), 0..20)) {
            let mut t = Table::new(["t", "re", "im"]).meta("seed", 42).meta("hbar", fmt_f64(1.0));
            for r in rows {
                t.push(r);
            }
            let text = t.to_csv();
            let back = Table::parse_csv(&text).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(back.to_csv(), text);
        }
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let v = serde_json::json!({"zeta": [1.5, -2.25e-300], "alpha": {"b": 1, "a": "x"}});
        let text = to_json(&v);
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(to_json(&back), text);
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(Table::parse_csv("a,b\n1,2\n3\n").is_err());
        assert!(Table::parse_csv("").is_err());
    }
}
