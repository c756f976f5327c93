//! CSV output with fixed numeric precision: currency 4 decimals,
//! probabilities 5, percentages 2. Undefined metrics print as `NA`.
//! Every file starts with a `# manifest <hash>` line.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub struct CsvFile {
    buf: String,
}

impl CsvFile {
    pub fn new(manifest_hash: &str, header: &str) -> Self {
        CsvFile {
            buf: format!("# manifest {manifest_hash}\n{header}\n"),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut f =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        f.write_all(self.buf.as_bytes())?;
        Ok(())
    }
}

/// Currency from integer half-units of 10⁻⁴.
pub fn currency_half(v: i64) -> String {
    format!("{:.4}", v as f64 / 2e4)
}

/// Currency from integer 10⁻⁴ units.
pub fn currency_e4(v: i64) -> String {
    format!("{:.4}", v as f64 / 1e4)
}

pub fn currency(v: f64) -> String {
    format!("{v:.4}")
}

pub fn probability(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.5}"),
        None => "NA".into(),
    }
}

pub fn ratio(r: Option<f64>) -> String {
    match r {
        Some(r) => format!("{r:.5}"),
        None => "NA".into(),
    }
}

pub fn percent(p: f64) -> String {
    format!("{p:.2}")
}

pub fn side_letter(side: mlob::tape::Side) -> &'static str {
    match side {
        mlob::tape::Side::Bid => "B",
        mlob::tape::Side::Ask => "S",
    }
}
