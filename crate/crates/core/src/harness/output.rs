//! CSV and JSON result files.

use std::path::Path;

use serde::Serialize;

use crate::error::{AbcError, Result};
use crate::stats::weighted_quantiles;
use crate::types::TimeSeriesData;

/// Levels of the quantile bands: median, 75% and 90% intervals plus the
/// quartiles.
pub const QUANTILE_LEVELS: [f64; 7] = [0.05, 0.125, 0.25, 0.5, 0.75, 0.875, 0.95];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| AbcError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> AbcError {
    AbcError::Parse(format!("{}: {e}", path.display()))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AbcError::Parse(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| AbcError::io(path, e))
}

/// Quantiles of one predicted quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub time: f64,
    pub component: String,
    pub quantiles: Vec<f64>,
}

/// Weighted quantile bands of `preds` at every predicted time and component.
pub fn quantile_table(
    preds: &[&TimeSeriesData],
    masses: &[f64],
    labels: &[String],
) -> Vec<QuantileRow> {
    let Some(first) = preds.first() else {
        return Vec::new();
    };
    let mut rows = Vec::with_capacity(first.len() * first.width());
    let mut col = vec![0.0; preds.len()];
    for i in 0..first.len() {
        for (c, label) in labels.iter().enumerate().take(first.width()) {
            for (k, p) in preds.iter().enumerate() {
                col[k] = p.record(i)[c];
            }
            rows.push(QuantileRow {
                time: first.times()[i],
                component: label.clone(),
                quantiles: weighted_quantiles(&col, masses, &QUANTILE_LEVELS),
            });
        }
    }
    rows
}

pub fn write_quantiles(path: &Path, rows: &[QuantileRow]) -> Result<()> {
    let mut header = vec!["time".to_string(), "component".to_string()];
    header.extend(QUANTILE_LEVELS.iter().map(|q| format!("q{q}")));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![fmt_f64(r.time), r.component.clone()];
            v.extend(r.quantiles.iter().map(|&q| fmt_f64(q)));
            v
        })
        .collect();
    write_csv(path, &header, &body)
}

/// `(lower, upper, density)` per bin over the range of the finite values.
pub fn histogram(x: &[f64], w: &[f64], bins: usize) -> Vec<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(w)
        .filter(|(v, m)| v.is_finite() && **m > 0.0)
        .map(|(v, m)| (*v, *m))
        .collect();
    if pts.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut mass = vec![0.0; bins];
    for (v, m) in pts {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        mass[b] += m;
    }
    mass.iter()
        .enumerate()
        .map(|(b, m)| {
            let l = lo + b as f64 * width;
            (l, l + width, m / (total * width))
        })
        .collect()
}

pub fn write_histogram(path: &Path, hist: &[(f64, f64, f64)]) -> Result<()> {
    let header = ["lower", "upper", "density"].map(String::from);
    let rows: Vec<Vec<String>> = hist
        .iter()
        .map(|&(l, u, d)| vec![fmt_f64(l), fmt_f64(u), fmt_f64(d)])
        .collect();
    write_csv(path, &header, &rows)
}

/// Column name of predicted component `label` at `time`.
pub fn prediction_column(label: &str, time: f64) -> String {
    format!("{label}@{time}")
}
