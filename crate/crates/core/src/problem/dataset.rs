//! Labeled-sample CSV files: header `bits,target[,aux...]`, one row per
//! structure, `bits` in variable order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Bitstring;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: Bitstring,
    pub y: f64,
}

impl LabeledSample {
    pub fn new(x: Bitstring, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::NonFinite(format!("target for {x} is {y}")));
        }
        Ok(LabeledSample { x, y })
    }
}

/// Checks that a data set is non-empty and every sample has the same length.
/// Returns that length.
pub fn check_consistent(data: &[LabeledSample]) -> Result<usize> {
    let first = data.first().ok_or_else(|| Error::InvalidParameter("data set is empty".into()))?;
    let n = first.x.len();
    for s in data {
        s.x.ensure_len(n)?;
        if !s.y.is_finite() {
            return Err(Error::NonFinite(format!("target for {} is {}", s.x, s.y)));
        }
    }
    Ok(n)
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<LabeledSample>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("bits") || headers.get(1) != Some("target") {
        return Err(Error::Encoding(format!(
            "dataset header must start with `bits,target`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let bits = record.get(0).unwrap_or_default();
        let target = record.get(1).unwrap_or_default();
        let x: Bitstring = bits.trim().parse()?;
        let y: f64 =
            target.trim().parse().map_err(|_| Error::Encoding(format!("target {target:?} is not a number")))?;
        out.push(LabeledSample::new(x, y)?);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(writer: W, data: &[LabeledSample]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    wtr.write_record(["bits", "target"])?;
    for s in data {
        wtr.write_record([s.x.to_string(), format!("{}", s.y)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<LabeledSample>> {
    read_csv(std::fs::File::open(path)?)
}

pub fn save_csv(path: impl AsRef<Path>, data: &[LabeledSample]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, data)
}
