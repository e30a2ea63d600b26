//! Fixed-format writers: every float is written as `{:.11e}` (12
//! significant digits) and lines end in `\n`, so identical runs give
//! byte-identical files.

use std::fs::File;
use std::path::Path;

use serde::Serialize;

use crate::Result;

pub fn fmt_f(v: f64) -> String {
    format!("{v:.11e}")
}

/// Writes a header row and pre-formatted records.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(File::create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// `(re, im)` pairs, one eigenvalue per row.
pub fn write_eigenvalues(path: &Path, eigs: &[(f64, f64)]) -> Result<()> {
    let rows: Vec<Vec<String>> = eigs.iter().map(|&(r, i)| vec![fmt_f(r), fmt_f(i)]).collect();
    write_csv(path, &["re", "im"], &rows)
}
