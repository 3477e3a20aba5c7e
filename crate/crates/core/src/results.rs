//! Result records and their CSV / JSON serializations.
//!
//! Every campaign emits a flat list of records keyed by
//! `(scenario, trial, snr_db, user, metric)`. Per-user rows carry the user
//! index; aggregate rows (sum rate, pooled BER, outage probabilities, ...)
//! use `user = -1`. The `seed` column is the derived per-trial seed so any
//! single row can be reproduced in isolation.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Sentinel user index for rows that aggregate over all users.
pub const AGGREGATE_USER: i32 = -1;

/// One measurement from a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario: String,
    pub trial: u64,
    pub snr_db: f64,
    /// User index, or -1 for aggregates.
    pub user: i32,
    pub metric: String,
    pub value: f64,
    /// Seed that reproduces this trial.
    pub seed: u64,
}

/// Output serialization format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Write records as CSV with the fixed header
/// `scenario,trial,snr_db,user,metric,value,seed`. The header is emitted
/// even when there are no records.
pub fn write_csv<W: Write>(records: &[ResultRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if records.is_empty() {
        w.write_record(["scenario", "trial", "snr_db", "user", "metric", "value", "seed"])?;
    }
    for record in records {
        w.serialize(record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read records back from CSV (used by tests and downstream tooling).
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Write records as a JSON array of flat objects.
pub fn write_json<W: Write>(records: &[ResultRecord], writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, records)?;
    Ok(())
}

/// Write records to a file (or stdout when `path` is `None`).
pub fn write_records(
    records: &[ResultRecord],
    path: Option<&Path>,
    format: OutputFormat,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p)?;
            let buf = std::io::BufWriter::new(file);
            match format {
                OutputFormat::Csv => write_csv(records, buf),
                OutputFormat::Json => write_json(records, buf),
            }
        }
        None => {
            let stdout = std::io::stdout();
            let lock = stdout.lock();
            match format {
                OutputFormat::Csv => write_csv(records, lock),
                OutputFormat::Json => write_json(records, lock),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ResultRecord> {
        vec![
            ResultRecord {
                scenario: "mmwave".into(),
                trial: 0,
                snr_db: -5.0,
                user: 0,
                metric: "rate".into(),
                value: 1.25,
                seed: 0xdead_beef,
            },
            ResultRecord {
                scenario: "mmwave".into(),
                trial: 0,
                snr_db: -5.0,
                user: 1,
                metric: "rate".into(),
                value: 0.5,
                seed: 0xdead_beef,
            },
            ResultRecord {
                scenario: "mmwave".into(),
                trial: 0,
                snr_db: -5.0,
                user: AGGREGATE_USER,
                metric: "sum_rate".into(),
                value: 1.75,
                seed: 0xdead_beef,
            },
        ]
    }

    #[test]
    fn csv_has_the_fixed_header_and_one_line_per_record() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "scenario,trial,snr_db,user,metric,value,seed");
        assert_eq!(lines[1], "mmwave,0,-5.0,0,rate,1.25,3735928559");
        assert!(lines[3].starts_with("mmwave,0,-5.0,-1,sum_rate,"));
    }

    #[test]
    fn empty_record_lists_still_emit_the_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim_end(),
            "scenario,trial,snr_db,user,metric,value,seed"
        );
    }

    #[test]
    fn csv_roundtrip_preserves_full_float_precision() {
        let mut records = sample();
        records[0].value = std::f64::consts::PI * 1e-7;
        records[1].value = f64::from_bits(0x3fe9_9999_9999_999a);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn json_is_an_array_of_flat_objects() {
        let mut buf = Vec::new();
        write_json(&sample(), &mut buf).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let arr = parsed.as_array().unwrap();
        assert_eq!(arr.len(), 3);
        assert_eq!(arr[2]["user"], -1);
        assert_eq!(arr[0]["metric"], "rate");
        assert_eq!(arr[0]["seed"], 0xdead_beefu64);
    }

    #[test]
    fn write_records_creates_files_in_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("out.csv");
        let json_path = dir.path().join("out.json");
        write_records(&sample(), Some(&csv_path), OutputFormat::Csv).unwrap();
        write_records(&sample(), Some(&json_path), OutputFormat::Json).unwrap();
        let csv_text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(csv_text.starts_with("scenario,trial,"));
        let back = read_csv(csv_text.as_bytes()).unwrap();
        assert_eq!(back, sample());
        let parsed: Vec<ResultRecord> =
            serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(parsed, sample());
    }
}
