//! CSV tables, atomic file writes and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::models::Cell;

/// 17 significant digits, which round-trips every f64.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                match cell {
                    Cell::Number(x) => s.push_str(&format_number(*x)),
                    Cell::Text(t) => s.push_str(t),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Write via a temporary file in the same directory and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    file.write_all(contents).with_context(|| format!("writing {}", tmp.display()))?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Plain-text `key: value` manifest, written last.
#[derive(Debug)]
pub struct Manifest {
    dir: PathBuf,
    entries: Vec<(String, String)>,
    warnings: Vec<String>,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(dir: &Path, command: &str) -> Self {
        let mut m = Self { dir: dir.to_path_buf(), entries: Vec::new(), warnings: Vec::new(), outputs: Vec::new() };
        m.entry("tool", "decolab");
        m.entry("version", env!("CARGO_PKG_VERSION"));
        m.entry("command", command);
        m.entry("started", chrono::Utc::now().to_rfc3339());
        m
    }

    pub fn entry(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        if !self.warnings.contains(&message) {
            self.warnings.push(message);
        }
    }

    /// Write a table and record its checksum, row count and column units.
    pub fn emit(&mut self, file: &str, table: &Table, units: &[String]) -> Result<()> {
        let bytes = table.to_csv().into_bytes();
        write_atomic(&self.dir.join(file), &bytes)?;
        self.entry(format!("output.{file}.sha256"), sha256_hex(&bytes));
        self.entry(format!("output.{file}.rows"), table.rows.len());
        let described: Vec<String> =
            table.columns.iter().zip(units).map(|(c, u)| if u.is_empty() { c.clone() } else { format!("{c} [{u}]") }).collect();
        self.entry(format!("output.{file}.columns"), described.join(", "));
        self.outputs.push(file.to_string());
        Ok(())
    }

    pub fn finish(mut self) -> Result<usize> {
        self.entry("finished", chrono::Utc::now().to_rfc3339());
        self.entry("outputs", self.outputs.join(", "));
        self.entry("warnings", self.warnings.len());
        let mut text = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(text, "{k}: {v}");
        }
        for (i, w) in self.warnings.iter().enumerate() {
            let _ = writeln!(text, "warning.{}: {w}", i + 1);
        }
        let _ = writeln!(text, "status: {}", if self.warnings.is_empty() { "ok" } else { "warned" });
        write_atomic(&self.dir.join("manifest.txt"), text.as_bytes())?;
        Ok(self.warnings.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(1.0), "1.0000000000000000e0");
    }

    proptest::proptest! {
        #[test]
        fn every_finite_number_round_trips(bits in proptest::num::u64::ANY) {
            let x = f64::from_bits(bits);
            if x.is_finite() {
                proptest::prop_assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), bits);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["t".into(), "D".into()]);
        t.rows.push(vec![Cell::Number(0.0), Cell::Number(1.5)]);
        t.rows.push(vec![Cell::Number(1.0), Cell::Text("stable")]);
        assert_eq!(t.to_csv(), "t,D\n0.0000000000000000e0,1.5000000000000000e0\n1.0000000000000000e0,stable\n");
    }

    #[test]
    fn checksum_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
