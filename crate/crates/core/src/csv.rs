//! Minimal CSV helpers shared by the export formats.
//!
//! Numbers are written with 17 significant digits in scientific notation,
//! which round-trips every finite `f64` exactly and is locale independent.

use crate::error::{Error, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {line}: '{field}': {e}")))
}
