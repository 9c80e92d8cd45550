use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::fit::FitReport;
use crate::error::{Error, Result};

/// Version tag written on the first line of every CSV the harness emits.
pub const CSV_VERSION: &str = "thermal-tn-csv v1";

/// One `(n, beta, epsilon)` point of the bond-dimension scaling study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub n: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub q_min: usize,
    pub max_tail_weight: f64,
    /// Seconds spent on this point, excluding the shared reference build.
    pub wall_time_s: f64,
    pub dt: f64,
    pub cumulative_discarded_weight: f64,
}

/// Writes `# <version> | <description>`, a header row and one row per record.
pub fn write_csv<T: Serialize, W: Write>(out: W, description: &str, rows: &[T]) -> Result<()> {
    let mut out = out;
    writeln!(out, "# {CSV_VERSION} | {description}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`], checking the version line.
pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let tag = first
        .strip_prefix("# ")
        .and_then(|rest| rest.split(" | ").next())
        .map(str::trim);
    if tag != Some(CSV_VERSION) {
        return Err(Error::Format(format!(
            "missing or unknown CSV version line: {}",
            first.trim()
        )));
    }
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_csv_file<T: Serialize>(path: &Path, description: &str, rows: &[T]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, description, rows)
}

pub fn read_csv_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_csv(std::fs::File::open(path)?)
}

/// Appends a titled fit block to a plain-text report file.
pub fn append_fit_report(path: &Path, title: &str, fit: &FitReport) -> Result<()> {
    append_text(path, &format!("## {title}\n{fit}\n"))
}

pub fn append_text(path: &Path, text: &str) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
