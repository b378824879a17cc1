use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::solvers::Method;

/// Column order of the sweep CSV.
pub const CSV_COLUMNS: [&str; 7] = [
    "method",
    "p",
    "trials",
    "successes",
    "mean_iterations",
    "mean_mismatch",
    "mean_solve_seconds",
];

/// Aggregate over the trials of one method at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub p: f64,
    pub trials: usize,
    pub successes: usize,
    pub mean_iterations: f64,
    pub mean_mismatch: f64,
    /// Wall-clock time; excluded from reproducibility guarantees.
    pub mean_solve_seconds: f64,
}

impl SweepRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, method: Method, p: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.method == method && r.p == p)
    }

    /// The same rows with the timing column zeroed.
    pub fn without_timing(&self) -> SweepResult {
        SweepResult {
            rows: self
                .rows
                .iter()
                .map(|r| SweepRow {
                    mean_solve_seconds: 0.0,
                    ..r.clone()
                })
                .collect(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        write_results(&mut buf, self).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Writes a header line and one row per entry. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_results<W: Write>(writer: W, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.method.as_str().to_string(),
            r.p.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            r.mean_iterations.to_string(),
            r.mean_mismatch.to_string(),
            r.mean_solve_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R, source_name: &str) -> Result<SweepResult> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::parse(
            source_name,
            1,
            format!("expected header `{}`", CSV_COLUMNS.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        if record.len() != CSV_COLUMNS.len() {
            return Err(Error::parse(
                source_name,
                line,
                format!("expected {} fields", CSV_COLUMNS.len()),
            ));
        }
        let field = |i: usize| &record[i];
        let bad = |i: usize| {
            Error::parse(
                source_name,
                line,
                format!("bad value `{}` in column `{}`", &record[i], CSV_COLUMNS[i]),
            )
        };
        let num = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let count = |i: usize| field(i).parse::<usize>().map_err(|_| bad(i));
        let row = SweepRow {
            method: field(0).parse().map_err(|_| bad(0))?,
            p: num(1)?,
            trials: count(2)?,
            successes: count(3)?,
            mean_iterations: num(4)?,
            mean_mismatch: num(5)?,
            mean_solve_seconds: num(6)?,
        };
        if row.successes > row.trials {
            return Err(Error::parse(source_name, line, "successes exceed trials"));
        }
        rows.push(row);
    }
    Ok(SweepResult { rows })
}
