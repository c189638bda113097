//! CSV emission for results, summaries and schedules.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::SimError;
use crate::sweep::{summarize, ResultRow, ScheduleRecord, SummaryRow, SweepOutput};

pub const RESULT_HEADER: [&str; 8] = ["seed", "trial", "K", "N", "M", "scheme", "sum_rate_bps_hz", "wallclock_ms"];
pub const SUMMARY_HEADER: [&str; 7] = ["K", "N", "M", "scheme", "trials", "mean_bps_hz", "std_bps_hz"];
pub const SCHEDULE_HEADER: [&str; 8] = ["trial", "N", "M", "scheme", "slot", "duration", "positions_m", "powers_w"];

/// Fixed-point text with 12 significant digits.
pub fn significant(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

fn joined(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn writer(path: &Path) -> Result<csv::Writer<File>, SimError> {
    csv::Writer::from_path(path).map_err(|source| SimError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn emit<W: Write>(
    path: &Path,
    w: &mut csv::Writer<W>,
    records: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), SimError> {
    let csv_err = |source| SimError::Csv {
        path: path.to_path_buf(),
        source,
    };
    for r in records {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn result_records(rows: &[ResultRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![
            r.seed.to_string(),
            r.trial.to_string(),
            r.users.to_string(),
            r.antennas.to_string(),
            r.patterns.to_string(),
            r.scheme.to_string(),
            significant(r.sum_rate),
            r.wallclock_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ]
    })
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), SimError> {
    let mut w = writer(path)?;
    let header = std::iter::once(RESULT_HEADER.map(String::from).to_vec());
    emit(path, &mut w, header.chain(result_records(rows)))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), SimError> {
    let mut w = writer(path)?;
    let header = std::iter::once(SUMMARY_HEADER.map(String::from).to_vec());
    let body = rows.iter().map(|r| {
        vec![
            r.users.to_string(),
            r.antennas.to_string(),
            r.patterns.to_string(),
            r.scheme.to_string(),
            r.trials.to_string(),
            significant(r.mean),
            significant(r.std),
        ]
    });
    emit(path, &mut w, header.chain(body))
}

/// One row per slot; positions and powers are `;`-separated and printed
/// exactly, so rates can be recomputed from the file.
pub fn write_schedules(path: &Path, records: &[ScheduleRecord]) -> Result<(), SimError> {
    let mut w = writer(path)?;
    let header = std::iter::once(SCHEDULE_HEADER.map(String::from).to_vec());
    let body = records.iter().flat_map(|rec| {
        rec.schedule.slots.iter().enumerate().map(move |(i, slot)| {
            vec![
                rec.trial.to_string(),
                rec.antennas.to_string(),
                rec.patterns.to_string(),
                rec.scheme.to_string(),
                i.to_string(),
                slot.duration.to_string(),
                joined(slot.pattern.positions()),
                joined(&slot.powers),
            ]
        })
    });
    emit(path, &mut w, header.chain(body))
}

/// Writes the results, the summary and, if configured, the schedules.
pub fn write_all(config: &ExperimentConfig, output: &SweepOutput) -> Result<Vec<SummaryRow>, SimError> {
    write_results(&config.out, &output.rows)?;
    let summary = summarize(&output.rows);
    write_summary(&config.summary_path(), &summary)?;
    if let Some(path) = &config.schedule_out {
        write_schedules(path, &output.schedules)?;
    }
    Ok(summary)
}
