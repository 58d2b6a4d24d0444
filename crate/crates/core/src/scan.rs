//! Batch decisions over a grid of `(x, y)` with a resumable journal.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{end_to_end, DecideOptions, DecisionReport};
use crate::sequence::{Offset, PisotParams};

pub const CSV_COLUMNS: [&str; 11] = [
    "x",
    "y",
    "r",
    "y_mod_x2",
    "verdict",
    "order",
    "coefficients",
    "second_modulus_lo",
    "second_modulus_hi",
    "first_failure",
    "n0",
];

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScanError + '_ {
    move |source| ScanError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub x: RangeInclusive<u64>,
    pub y: RangeInclusive<u64>,
    pub r: Offset,
    pub max_order: usize,
    pub opts: DecideOptions,
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub x: u64,
    pub y: u64,
    pub r: String,
    pub y_mod_x2: u64,
    pub verdict: String,
    pub order: Option<usize>,
    pub coefficients: String,
    pub second_modulus_lo: String,
    pub second_modulus_hi: String,
    pub first_failure: Option<u64>,
    pub n0: Option<u64>,
}

impl ScanRecord {
    pub fn from_report(x: u64, y: u64, report: &DecisionReport) -> Self {
        let (lo, hi) = report
            .second_root_modulus_bounds
            .as_ref()
            .map(|(lo, hi)| (lo.to_decimal_string(), hi.to_decimal_string()))
            .unwrap_or_default();
        ScanRecord {
            x,
            y,
            r: report.params.r.to_string(),
            y_mod_x2: y % (x * x),
            verdict: report.verdict.label().to_string(),
            order: report.recurrence.as_ref().map(|r| r.order()),
            coefficients: report
                .recurrence
                .as_ref()
                .map(|r| format!("[{}]", r.coefficients().iter().join(",")))
                .unwrap_or_default(),
            second_modulus_lo: lo,
            second_modulus_hi: hi,
            first_failure: report.first_failure,
            n0: report.n0,
        }
    }

    fn error(x: u64, y: u64, r: Offset, message: &str) -> Self {
        ScanRecord {
            x,
            y,
            r: r.to_string(),
            y_mod_x2: y % (x * x),
            verdict: format!("Error: {message}"),
            order: None,
            coefficients: String::new(),
            second_modulus_lo: String::new(),
            second_modulus_hi: String::new(),
            first_failure: None,
            n0: None,
        }
    }
}

/// Pairs with `0 < x < y`, in row order.
pub fn scan_pairs(cfg: &ScanConfig) -> Vec<(u64, u64)> {
    cfg.x
        .clone()
        .cartesian_product(cfg.y.clone())
        .filter(|&(x, y)| 0 < x && x < y)
        .collect()
}

pub fn scan_one(x: u64, y: u64, cfg: &ScanConfig) -> ScanRecord {
    let params = match PisotParams::new(x, y, cfg.r) {
        Ok(p) => p,
        Err(e) => return ScanRecord::error(x, y, cfg.r, &e.to_string()),
    };
    match end_to_end(&params, cfg.max_order, 0, &cfg.opts) {
        Ok((_, report)) => ScanRecord::from_report(x, y, &report),
        Err(e) => ScanRecord::error(x, y, cfg.r, &e.to_string()),
    }
}

/// Scans in memory; rows sorted by `(x, y)`.
pub fn scan_records(cfg: &ScanConfig) -> Vec<ScanRecord> {
    scan_pairs(cfg).par_iter().map(|&(x, y)| scan_one(x, y, cfg)).collect()
}

pub fn journal_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".journal");
    PathBuf::from(name)
}

/// Completed records from an earlier run; a torn last line is ignored.
fn read_journal(path: &Path, r: Offset) -> Result<BTreeMap<(u64, u64), ScanRecord>, ScanError> {
    let mut done = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(io_err(path)(e)),
    };
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if let Ok(rec) = serde_json::from_str::<ScanRecord>(&line) {
            if rec.r == r.to_string() {
                done.insert((rec.x, rec.y), rec);
            }
        }
    }
    Ok(done)
}

pub fn write_csv<W: Write>(records: &[ScanRecord], out: W) -> Result<(), ScanError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for rec in records {
        w.serialize(rec)?;
    }
    w.flush().map_err(|e| ScanError::Io {
        path: PathBuf::from("<csv>"),
        source: e,
    })?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ScanRecord>, ScanError> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

/// Scans the grid and writes the CSV to `output`.
///
/// Each finished pair is appended to `<output>.journal` first, so an
/// interrupted scan resumes where it stopped. The journal is removed once
/// the CSV is in place.
pub fn scan(cfg: &ScanConfig, output: &Path) -> Result<Vec<ScanRecord>, ScanError> {
    let journal = journal_path(output);
    let mut done = read_journal(&journal, cfg.r)?;
    let todo: Vec<(u64, u64)> = scan_pairs(cfg)
        .into_iter()
        .filter(|key| !done.contains_key(key))
        .collect();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&journal)
        .map_err(io_err(&journal))?;
    let sink = Mutex::new(file);
    let fresh: Vec<ScanRecord> = todo
        .par_iter()
        .map(|&(x, y)| -> Result<ScanRecord, ScanError> {
            let rec = scan_one(x, y, cfg);
            let line = serde_json::to_string(&rec).expect("record serializes");
            let mut f = sink.lock().expect("journal lock");
            writeln!(f, "{line}")
                .and_then(|_| f.flush())
                .map_err(io_err(&journal))?;
            Ok(rec)
        })
        .collect::<Result<_, _>>()?;
    for rec in fresh {
        done.insert((rec.x, rec.y), rec);
    }
    let wanted: std::collections::BTreeSet<(u64, u64)> = scan_pairs(cfg).into_iter().collect();
    let records: Vec<ScanRecord> = done
        .into_iter()
        .filter(|(key, _)| wanted.contains(key))
        .map(|(_, rec)| rec)
        .collect();
    let tmp = {
        let mut name = output.as_os_str().to_owned();
        name.push(".tmp");
        PathBuf::from(name)
    };
    let file = File::create(&tmp).map_err(io_err(&tmp))?;
    write_csv(&records, file)?;
    fs::rename(&tmp, output).map_err(io_err(output))?;
    fs::remove_file(&journal).map_err(io_err(&journal))?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(x: RangeInclusive<u64>, y: RangeInclusive<u64>) -> ScanConfig {
        ScanConfig {
            x,
            y,
            r: Offset::half(),
            max_order: 6,
            opts: DecideOptions {
                check_limit: 2000,
                ..DecideOptions::default()
            },
        }
    }

    #[test]
    fn pairs_skip_invalid() {
        assert_eq!(scan_pairs(&cfg(3..=4, 3..=5)), vec![(3, 4), (3, 5), (4, 5)]);
        let empty = cfg(4..=4, RangeInclusive::new(9, 8));
        assert!(scan_pairs(&empty).is_empty());
    }

    #[test]
    fn empty_range_writes_header_only() {
        let mut out = Vec::new();
        write_csv(&[], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), CSV_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn record_fields() {
        let rec = scan_one(5, 17, &cfg(5..=5, 17..=17));
        assert_eq!(rec.verdict, "Proved");
        assert_eq!(rec.order, Some(2));
        assert_eq!(rec.coefficients, "[4,-2]");
        assert_eq!(rec.y_mod_x2, 17);
        assert!(rec.n0.is_some());
    }
}
