//! LP and MPS file writers, plus readers used to audit them.
//!
//! Both writers emit every column with explicit bounds and print numbers in
//! their shortest round-trip form, so parsing a written file restores the
//! model's coefficients exactly. Row families and metadata are not stored in
//! either format and come back empty.

mod lp;
mod mps;

use std::fs;
use std::path::Path;

pub use lp::{parse_lp, read_lp, write_lp};
pub use mps::{parse_mps, read_mps, write_mps, MpsSense};

use super::model::MilpModel;
use crate::error::{Error, Result};

/// Writes `model` to `path` in LP format.
pub fn export_lp(model: &MilpModel, path: &Path) -> Result<()> {
    write_file(path, &write_lp(model)?)
}

/// Writes `model` to `path` in fixed-format MPS, keeping its own sense.
pub fn export_mps(model: &MilpModel, path: &Path) -> Result<()> {
    write_file(path, &write_mps(model, MpsSense::Native)?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::EmptyPath);
    }
    fs::write(path, text)?;
    Ok(())
}

/// Shortest text that parses back to the same `f64`.
pub(crate) fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -3.0, 0.1, 1.0 / 3.0, 1e-7, -2.5e20, 4.04, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v, "{}", num(v));
        }
        assert_eq!(num(2.0), "2");
        assert_eq!(num(-0.25), "-0.25");
    }
}
