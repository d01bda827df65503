//! Per-replicate CSV records.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const HEADER: [&str; 10] = [
    "run_id",
    "d",
    "alpha",
    "s",
    "replicate_index",
    "seed",
    "n_points",
    "n_minimal",
    "statistic_value",
    "elapsed_ms",
];

/// Version tag of the column layout in [`HEADER`].
pub const SCHEMA_VERSION: &str = "records/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub run_id: String,
    pub d: usize,
    pub alpha: f64,
    pub s: f64,
    pub replicate_index: u64,
    pub seed: u64,
    pub n_points: u64,
    pub n_minimal: u64,
    pub statistic_value: f64,
    pub elapsed_ms: u64,
}

impl ExperimentRecord {
    fn fields(&self) -> [String; 10] {
        // `Display` for f64 prints the shortest string that round-trips.
        [
            self.run_id.clone(),
            self.d.to_string(),
            self.alpha.to_string(),
            self.s.to_string(),
            self.replicate_index.to_string(),
            self.seed.to_string(),
            self.n_points.to_string(),
            self.n_minimal.to_string(),
            self.statistic_value.to_string(),
            self.elapsed_ms.to_string(),
        ]
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.n_minimal > self.n_points {
            return Err(format!("n_minimal {} exceeds n_points {}", self.n_minimal, self.n_points));
        }
        if !(self.statistic_value >= 0.0) {
            return Err(format!("statistic_value {} is negative or NaN", self.statistic_value));
        }
        if self.n_minimal == 0 && self.statistic_value != 0.0 {
            return Err("statistic_value must be 0 without minimal points".into());
        }
        Ok(())
    }
}

pub fn to_csv_bytes(records: &[ExperimentRecord]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER).expect("writing to memory");
    for r in records {
        w.write_record(r.fields()).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Writes `records` to `path` through a temporary file and a rename, so the
/// file on disk is always complete.
pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    let bytes = to_csv_bytes(records);
    let mut f = fs::File::create(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
    f.write_all(&bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    f.sync_all().map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

/// Reads a record file written by [`write_records`].
pub fn load_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(file);
    let mut rows = reader.records();
    let header = match rows.next() {
        None => {
            return Err(HarnessError::SchemaVersion {
                path: path.into(),
                expected: SCHEMA_VERSION,
                header: "empty file".into(),
            })
        }
        Some(h) => h.map_err(|e| parse_error(path, 1, e.to_string()))?,
    };
    if header.iter().ne(HEADER.iter().copied()) {
        let joined = header.iter().collect::<Vec<_>>().join(",");
        return Err(HarnessError::SchemaVersion {
            path: path.into(),
            expected: SCHEMA_VERSION,
            header: joined,
        });
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let record: ExperimentRecord = row
            .deserialize(Some(&csv::StringRecord::from(HEADER.to_vec())))
            .map_err(|e| parse_error(path, line, e.to_string()))?;
        record.validate().map_err(|reason| parse_error(path, line, reason))?;
        out.push(record);
    }
    Ok(out)
}

fn parse_error(path: &Path, line: u64, reason: String) -> HarnessError {
    HarnessError::Parse { path: path.into(), line, reason }
}
