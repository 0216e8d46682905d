//! Result tables and atomic file output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// One line of a result table: `quantity` at time or length `n`, with an
/// optional error bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub quantity: String,
    pub value: f64,
    pub error: Option<f64>,
}

impl Row {
    pub fn exact(n: usize, quantity: impl Into<String>, value: f64) -> Self {
        Self {
            n,
            quantity: quantity.into(),
            value,
            error: None,
        }
    }

    pub fn estimate(n: usize, quantity: impl Into<String>, value: f64, error: f64) -> Self {
        Self {
            n,
            quantity: quantity.into(),
            value,
            error: Some(error),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with header `n,quantity,value,error`; exact quantities leave `error`
/// empty.
pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from("n,quantity,value,error\n");
    for r in rows {
        let error = r.error.map(number).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", r.n, r.quantity, number(r.value), error));
    }
    out
}

pub fn to_json(rows: &[Row]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
    text.push('\n');
    text
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
