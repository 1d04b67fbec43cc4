//! Numeric CSV tables written with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes equal-length columns under `header`.
pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) || header.len() != columns.len() {
        return Err(Error::DimensionMismatch(format!("ragged table for {}", path.display())));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| fmt(c[i])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric table; a first line that does not parse is taken as the header.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut header = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if cols.is_empty() {
                    cols = vec![Vec::new(); vals.len()];
                }
                if vals.len() != cols.len() {
                    return Err(Error::Parse(format!("{}:{}: expected {} fields", path.display(), i + 1, cols.len())));
                }
                for (c, v) in cols.iter_mut().zip(vals) {
                    c.push(v);
                }
            }
            Err(_) if i == 0 => header = fields.iter().map(|s| s.to_string()).collect(),
            Err(_) => return Err(Error::Parse(format!("{}:{}: non-numeric field", path.display(), i + 1))),
        }
    }
    Ok((header, cols))
}

/// Last column of a table; the usual layout is `time, value` or a bare column.
pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let (_, cols) = read_columns(path)?;
    cols.into_iter().last().ok_or_else(|| Error::Parse(format!("{}: empty table", path.display())))
}
