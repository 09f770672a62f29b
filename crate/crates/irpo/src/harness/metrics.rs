//! Per-iteration metrics rows and their CSV schema.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

/// Exact column set; treated as the schema version. `aggregate` refuses
/// files whose header differs.
pub const METRICS_HEADER: &str = "samples,iteration,eval_return,success,kl_step,tau,omega_json,wall_s";

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("metrics io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema mismatch in {path}: header {found:?}, expected {expected:?}")]
    SchemaMismatch {
        path: String,
        found: String,
        expected: String,
    },
}

/// One row per training iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub samples: u64,
    pub iteration: u64,
    pub eval_return: f64,
    pub success: f64,
    pub kl_step: f64,
    pub tau: f64,
    pub omega: Vec<f64>,
    pub wall_s: f64,
}

impl MetricsRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.samples.to_string(),
            self.iteration.to_string(),
            format!("{}", self.eval_return),
            format!("{}", self.success),
            format!("{}", self.kl_step),
            format!("{}", self.tau),
            serde_json::to_string(&self.omega).expect("omega serializes"),
            format!("{}", self.wall_s),
        ]
    }
}

/// Streams rows to a CSV file; the header is written immediately, so a run
/// with zero iterations still leaves a valid (header-only) file.
pub struct MetricsWriter {
    writer: csv::Writer<std::fs::File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self, MetricsError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = std::fs::File::create(path)?;
        let mut writer = csv::WriterBuilder::new().from_writer(file);
        writer.write_record(METRICS_HEADER.split(','))?;
        writer.flush()?;
        Ok(Self { writer })
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<(), MetricsError> {
        self.writer.write_record(row.record())?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Writes a full metrics table to a string (used by tests).
pub fn to_csv_string(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let rec = r.record();
        // The omega column may contain commas; quote it like the csv writer.
        let mut fields = rec;
        fields[6] = format!("\"{}\"", fields[6]);
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Reads a metrics CSV, enforcing the schema header.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, MetricsError> {
    let mut reader = csv::ReaderBuilder::new().from_path(path)?;
    let header = reader
        .headers()?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != METRICS_HEADER {
        return Err(MetricsError::SchemaMismatch {
            path: path.display().to_string(),
            found: header,
            expected: METRICS_HEADER.to_string(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        let omega: Vec<f64> = serde_json::from_str(&r[6]).unwrap_or_default();
        rows.push(MetricsRow {
            samples: r[0].parse().unwrap_or(0),
            iteration: r[1].parse().unwrap_or(0),
            eval_return: r[2].parse().unwrap_or(f64::NAN),
            success: r[3].parse().unwrap_or(f64::NAN),
            kl_step: r[4].parse().unwrap_or(f64::NAN),
            tau: r[5].parse().unwrap_or(f64::NAN),
            omega,
            wall_s: r[7].parse().unwrap_or(f64::NAN),
        });
    }
    Ok(rows)
}

/// Writes an arbitrary flush of rows to `path` (header + rows).
pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<(), MetricsError> {
    let mut writer = MetricsWriter::create(path)?;
    for row in rows {
        writer.write(row)?;
    }
    Ok(())
}

/// Appends a plain line to a log file next to the metrics (best effort).
pub fn append_note(path: &Path, line: &str) {
    if let Ok(mut f) = std::fs::OpenOptions::new().create(true).append(true).open(path) {
        let _ = writeln!(f, "{line}");
    }
}
