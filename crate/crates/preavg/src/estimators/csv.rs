//! Two-column CSV ingestion and export for observed series.
//!
//! Format: `time,value` per line, optional header, strictly increasing and
//! equally spaced times (spacing tolerance 1e-9 * delta).

use super::{ObservedSeries, SamplingGrid};
use crate::error::{Error, Result};
use std::io::{BufWriter, Write};
use std::path::Path;

pub fn read_series_str(content: &str, theta: f64) -> Result<ObservedSeries> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let a = parts.next().unwrap_or("").trim();
        let b = parts
            .next()
            .ok_or_else(|| Error::Csv(format!("line {}: expected two columns", lineno + 1)))?
            .trim();
        if parts.next().is_some() {
            return Err(Error::Csv(format!(
                "line {}: expected exactly two columns",
                lineno + 1
            )));
        }
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(v)) => {
                times.push(t);
                values.push(v);
            }
            _ if lineno == 0 => continue, // header row
            _ => {
                return Err(Error::Csv(format!(
                    "line {}: could not parse '{a},{b}' as numbers",
                    lineno + 1
                )))
            }
        }
    }
    if times.len() < 3 {
        return Err(Error::Csv(format!(
            "need at least 3 rows, found {}",
            times.len()
        )));
    }
    let n = times.len() - 1;
    let delta = (times[n] - times[0]) / n as f64;
    if !(delta > 0.0) {
        return Err(Error::Csv("times must be strictly increasing".into()));
    }
    for i in 0..n {
        let spacing = times[i + 1] - times[i];
        if spacing <= 0.0 {
            return Err(Error::Csv(format!(
                "times must be strictly increasing (row {})",
                i + 2
            )));
        }
        if (spacing - delta).abs() > 1e-9 * delta {
            return Err(Error::Csv(format!(
                "unequal spacing at row {}: {} vs expected {}",
                i + 2,
                spacing,
                delta
            )));
        }
    }
    let grid = SamplingGrid::new(delta, n, theta)?;
    ObservedSeries::new(values, grid)
}

pub fn read_series_csv(path: &Path, theta: f64) -> Result<ObservedSeries> {
    let content = std::fs::read_to_string(path)?;
    read_series_str(&content, theta)
}

/// Write a series as `time,value` rows. Values use the shortest
/// representation that round-trips exactly through f64 parsing.
pub fn write_series_csv(path: &Path, series: &ObservedSeries) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "time,value")?;
    let delta = series.grid().delta();
    for (i, v) in series.values().iter().enumerate() {
        writeln!(w, "{},{}", i as f64 * delta, v)?;
    }
    w.flush()?;
    Ok(())
}
