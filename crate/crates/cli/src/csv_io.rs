//! Strict CSV ingestion: `x,value` function tables and `n,value` weights.

use std::io::{Read, Write};
use std::path::Path;

use regvar_core::Tabulated;

use crate::error::{CliError, Result};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input)
}

fn rows<R: Read>(input: R, path: &Path, header: [&str; 2]) -> Result<Vec<(String, f64)>> {
    let fail = |message: String| CliError::Csv { path: path.into(), message };
    let mut rdr = reader(input);
    let found = rdr.headers().map_err(|e| fail(e.to_string()))?.clone();
    if found.len() != 2 || found[0] != *header[0] || found[1] != *header[1] {
        return Err(fail(format!("expected header `{},{}`, found `{}`", header[0], header[1], found.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| fail(format!("line {line}: {e}")))?;
        if rec.len() != 2 {
            return Err(fail(format!("line {line}: expected 2 fields, found {}", rec.len())));
        }
        let value: f64 = rec[1].parse().map_err(|_| fail(format!("line {line}: bad value {:?}", &rec[1])))?;
        if !value.is_finite() {
            return Err(fail(format!("line {line}: non-finite value")));
        }
        out.push((rec[0].to_string(), value));
    }
    Ok(out)
}

/// Reads an `x,value` table; `x` must be finite and strictly increasing.
pub fn parse_function<R: Read>(input: R, path: &Path) -> Result<Tabulated> {
    let fail = |message: String| CliError::Csv { path: path.into(), message };
    let mut points = Vec::new();
    for (i, (x, v)) in rows(input, path, ["x", "value"])?.into_iter().enumerate() {
        let line = i + 2;
        let x: f64 = x.parse().map_err(|_| fail(format!("line {line}: bad x {x:?}")))?;
        if !x.is_finite() {
            return Err(fail(format!("line {line}: non-finite x")));
        }
        if let Some(&(prev, _)) = points.last() {
            if !(x > prev) {
                return Err(fail(format!("line {line}: x = {x} does not exceed previous {prev}")));
            }
        }
        points.push((x, v));
    }
    Tabulated::new(points, path.display().to_string()).map_err(|e| fail(e.to_string()))
}

/// Reads `n,value` weights with `n = 1, 2, …` in order.
pub fn parse_weights<R: Read>(input: R, path: &Path) -> Result<Vec<f64>> {
    let fail = |message: String| CliError::Csv { path: path.into(), message };
    let mut out = Vec::new();
    for (i, (n, v)) in rows(input, path, ["n", "value"])?.into_iter().enumerate() {
        let n: usize = n.parse().map_err(|_| fail(format!("line {}: bad index {n:?}", i + 2)))?;
        if n != i + 1 {
            return Err(fail(format!("line {}: expected index {}, found {n}", i + 2, i + 1)));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(fail("no rows".into()));
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn read_function(path: &Path) -> Result<Tabulated> {
    parse_function(open(path)?, path)
}

pub fn read_weights(path: &Path) -> Result<Vec<f64>> {
    parse_weights(open(path)?, path)
}

/// Writes `x,value` rows with shortest round-trip decimal formatting.
pub fn write_function<W: Write>(out: W, points: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Csv { path: "<output>".into(), message: e.to_string() };
    w.write_record(["x", "value"]).map_err(io)?;
    for (x, v) in points {
        w.write_record([format!("{x:?}"), format!("{v:?}")]).map_err(io)?;
    }
    w.flush().map_err(|source| CliError::Io { path: "<output>".into(), source })?;
    Ok(())
}
