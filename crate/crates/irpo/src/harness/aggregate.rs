//! Multi-seed curve aggregation: mean and 95% confidence intervals at
//! aligned sample checkpoints.

use std::path::Path;

use super::metrics::{read_metrics, MetricsError, MetricsRow};

/// Which metrics column to aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    EvalReturn,
    Success,
}

impl Column {
    pub fn parse(name: &str) -> Option<Column> {
        match name {
            "eval_return" => Some(Column::EvalReturn),
            "success" => Some(Column::Success),
            _ => None,
        }
    }

    fn pick(&self, row: &MetricsRow) -> f64 {
        match self {
            Column::EvalReturn => row.eval_return,
            Column::Success => row.success,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub samples: f64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Linear interpolation of a (samples, value) series at `x`.
fn interp(series: &[(f64, f64)], x: f64) -> f64 {
    match series.iter().position(|&(s, _)| s >= x) {
        Some(0) => series[0].1,
        Some(i) => {
            let (x0, y0) = series[i - 1];
            let (x1, y1) = series[i];
            if x1 == x0 {
                y1
            } else {
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
        None => series.last().map(|&(_, y)| y).unwrap_or(f64::NAN),
    }
}

/// Aggregates per-seed metrics files into a mean curve with 95% confidence
/// intervals (`mean ± 1.96 s / sqrt(n)`), interpolating every run onto a
/// shared grid of sample checkpoints. Files with a mismatched schema header
/// are rejected.
pub fn aggregate(
    paths: &[impl AsRef<Path>],
    column: Column,
    points: usize,
) -> Result<Vec<AggregateRow>, MetricsError> {
    let mut series: Vec<Vec<(f64, f64)>> = Vec::new();
    for p in paths {
        let rows = read_metrics(p.as_ref())?;
        let s: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.samples as f64, column.pick(r)))
            .collect();
        if !s.is_empty() {
            series.push(s);
        }
    }
    if series.is_empty() {
        return Ok(Vec::new());
    }
    let lo = series
        .iter()
        .map(|s| s[0].0)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = series
        .iter()
        .map(|s| s[s.len() - 1].0)
        .fold(f64::INFINITY, f64::min);
    if hi < lo {
        return Ok(Vec::new());
    }
    let n_points = points.max(2).min(2048);
    let n = series.len() as f64;
    let mut out = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let x = lo + (hi - lo) * i as f64 / (n_points - 1) as f64;
        let values: Vec<f64> = series.iter().map(|s| interp(s, x)).collect();
        let mean = values.iter().sum::<f64>() / n;
        let ci = if series.len() > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            1.96 * (var / n).sqrt()
        } else {
            0.0
        };
        out.push(AggregateRow {
            samples: x,
            mean,
            ci_low: mean - ci,
            ci_high: mean + ci,
        });
    }
    Ok(out)
}

/// Serializes aggregate rows (`samples,mean,ci_low,ci_high`).
pub fn rows_to_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from("samples,mean,ci_low,ci_high\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.samples, r.mean, r.ci_low, r.ci_high
        ));
    }
    out
}
