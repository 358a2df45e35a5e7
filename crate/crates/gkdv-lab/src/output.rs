//! Files written by the command line.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Two-column `x,value` CSV with 17 significant digits, the same layout as
/// `gkdv_core::numerics::Profile::to_csv`.
pub fn write_profile(path: &Path, xs: &[f64], values: &[f64]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,value")?;
    for (x, v) in xs.iter().zip(values) {
        writeln!(w, "{x:.16e},{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// One CSV row per record; the header comes from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
    for r in rows {
        w.serialize(r).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}
