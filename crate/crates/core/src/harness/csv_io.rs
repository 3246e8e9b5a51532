//! CSV files consumed by the plotting scripts.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! finite f64 exactly.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::learner::RoundRecord;

use super::trial::{AggregateRow, TrialResult};

pub const TRIAL_HEADER: [&str; 7] = ["trial", "t", "loss", "cum_loss", "eta", "block", "purity"];
pub const AGGREGATE_HEADER: [&str; 4] = ["t", "mean_avg_regret", "std_avg_regret", "n_trials"];

/// One line of a per-trial file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub record: RoundRecord,
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Csv(format!("{other:?}")),
    }
}

fn flush<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

pub fn write_trial_csv<W: Write>(out: W, trials: &[TrialResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_HEADER).map_err(csv_err)?;
    for tr in trials {
        for r in &tr.rounds {
            w.write_record([
                tr.trial.to_string(),
                r.t.to_string(),
                format_float(r.loss),
                format_float(r.cumulative_loss),
                format_float(r.eta),
                r.block.to_string(),
                format_float(r.prediction_purity),
            ])
            .map_err(csv_err)?;
        }
    }
    flush(w)
}

pub fn write_aggregate_csv<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            format_float(r.mean_avg_regret),
            format_float(r.std_avg_regret),
            r.n_trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    flush(w)
}

fn records<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let got = reader.headers().map_err(csv_err)?;
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Csv(format!("expected header {}, got {}", header.join(","), got.iter().collect::<Vec<_>>().join(","))));
    }
    reader.records().map(|r| r.map_err(csv_err)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, line: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Csv(format!("row {line}: missing column {name}")))?;
    raw.parse().map_err(|_| Error::Csv(format!("row {line}: bad {name} value {raw:?}")))
}

pub fn parse_trial_csv<R: Read>(input: R) -> Result<Vec<TrialRow>> {
    records(input, &TRIAL_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 2;
            Ok(TrialRow {
                trial: field(rec, 0, "trial", line)?,
                record: RoundRecord {
                    t: field(rec, 1, "t", line)?,
                    loss: field(rec, 2, "loss", line)?,
                    cumulative_loss: field(rec, 3, "cum_loss", line)?,
                    eta: field(rec, 4, "eta", line)?,
                    block: field(rec, 5, "block", line)?,
                    prediction_purity: field(rec, 6, "purity", line)?,
                },
            })
        })
        .collect()
}

pub fn parse_aggregate_csv<R: Read>(input: R) -> Result<Vec<AggregateRow>> {
    records(input, &AGGREGATE_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 2;
            Ok(AggregateRow {
                t: field(rec, 0, "t", line)?,
                mean_avg_regret: field(rec, 1, "mean_avg_regret", line)?,
                std_avg_regret: field(rec, 2, "std_avg_regret", line)?,
                n_trials: field(rec, 3, "n_trials", line)?,
            })
        })
        .collect()
}
