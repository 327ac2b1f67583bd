//! Comparing a result directory against an oracle.

use std::path::Path;

use serde::Serialize;

use crate::error::{AbcError, Result};
use crate::stats::{
    ks_one_sample_weighted, ks_two_sample_weighted, mean, normal_cdf, variance, weighted_mean,
    weighted_variance,
};

/// Where the reference distribution of a column comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    /// `oracle.json` Gaussians, then the `ideal/` draws.
    Auto,
    Gaussian {
        mean: f64,
        variance: f64,
        column: String,
    },
    Draws {
        path: String,
        column: String,
    },
}

impl OracleSpec {
    /// Parses `auto`, `gaussian:MEAN,VAR@COLUMN` or `draws:PATH@COLUMN`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || {
            AbcError::Parse(format!(
                "oracle '{s}': expected auto, gaussian:M,V@COL or draws:PATH@COL"
            ))
        };
        if s == "auto" {
            return Ok(OracleSpec::Auto);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        // Column names contain '@' themselves, so split at the first one.
        let (body, column) = rest.split_once('@').ok_or_else(bad)?;
        match kind {
            "gaussian" => {
                let (m, v) = body.split_once(',').ok_or_else(bad)?;
                let mean = m.trim().parse().map_err(|_| bad())?;
                let variance: f64 = v.trim().parse().map_err(|_| bad())?;
                if !(variance > 0.0) {
                    return Err(bad());
                }
                Ok(OracleSpec::Gaussian {
                    mean,
                    variance,
                    column: column.into(),
                })
            }
            "draws" => Ok(OracleSpec::Draws {
                path: body.into(),
                column: column.into(),
            }),
            _ => Err(bad()),
        }
    }
}

/// One marginal of one run against its reference.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalComparison {
    pub run: String,
    pub column: String,
    pub reference: String,
    pub mean: f64,
    pub variance: f64,
    pub reference_mean: f64,
    pub reference_variance: f64,
    pub mean_error: f64,
    pub variance_ratio: f64,
    pub ks: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub experiment: String,
    pub comparisons: Vec<MarginalComparison>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let perr = |e: csv::Error| AbcError::Parse(format!("{}: {e}", path.display()));
        let mut rdr = csv::Reader::from_path(path).map_err(perr)?;
        let header = rdr
            .headers()
            .map_err(perr)?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(perr)?;
            // Empty cells are draws without a prediction.
            rows.push(rec.iter().map(|s| s.parse().unwrap_or(f64::NAN)).collect());
        }
        Ok(Table { header, rows })
    }

    fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Column values with masses, dropping draws without a finite value.
    fn weighted(&self, name: &str) -> Option<(Vec<f64>, Vec<f64>)> {
        let x = self.column(name)?;
        let w = self.column("weight")?;
        let m = self.column("multiplicity")?;
        let (x, w) = x
            .into_iter()
            .zip(w.iter().zip(&m).map(|(a, b)| a * b))
            .filter(|(v, w)| !v.is_nan() && *w > 0.0)
            .unzip();
        Some((x, w))
    }
}

fn gaussian_row(
    run: &str,
    column: &str,
    x: &[f64],
    w: &[f64],
    m: f64,
    v: f64,
) -> MarginalComparison {
    let (mu, var) = (weighted_mean(x, w), weighted_variance(x, w));
    MarginalComparison {
        run: run.into(),
        column: column.into(),
        reference: "gaussian".into(),
        mean: mu,
        variance: var,
        reference_mean: m,
        reference_variance: v,
        mean_error: mu - m,
        variance_ratio: var / v,
        ks: ks_one_sample_weighted(x, w, |t| normal_cdf(t, m, v)),
    }
}

fn draws_row(
    run: &str,
    column: &str,
    reference: &str,
    x: &[f64],
    w: &[f64],
    y: &[f64],
) -> MarginalComparison {
    let (mu, var) = (weighted_mean(x, w), weighted_variance(x, w));
    let y: Vec<f64> = y.iter().copied().filter(|v| v.is_finite()).collect();
    let (m, v) = (mean(&y), variance(&y));
    MarginalComparison {
        run: run.into(),
        column: column.into(),
        reference: reference.into(),
        mean: mu,
        variance: var,
        reference_mean: m,
        reference_variance: v,
        mean_error: mu - m,
        variance_ratio: var / v,
        ks: ks_two_sample_weighted(x, w, &y, &vec![1.0; y.len()]),
    }
}

fn run_labels(dir: &Path) -> Result<(String, Vec<String>)> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| AbcError::io(&path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| AbcError::Parse(format!("{}: {e}", path.display())))?;
    let id = v["experiment"].as_str().unwrap_or_default().to_string();
    let labels = v["runs"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|r| r["label"].as_str().map(String::from))
                .collect()
        })
        .unwrap_or_default();
    Ok((id, labels))
}

/// Compares every run in the result directory `dir` with `oracle`.
pub fn compare_results(dir: &Path, oracle: &OracleSpec) -> Result<ComparisonReport> {
    let (experiment, labels) = run_labels(dir)?;
    let mut out = Vec::new();
    let tables: Vec<(String, Table)> = labels
        .into_iter()
        .map(|l| Table::read(&dir.join(&l).join("draws.csv")).map(|t| (l, t)))
        .collect::<Result<_>>()?;
    match oracle {
        OracleSpec::Gaussian {
            mean,
            variance,
            column,
        } => {
            for (l, t) in &tables {
                if let Some((x, w)) = t.weighted(column) {
                    out.push(gaussian_row(l, column, &x, &w, *mean, *variance));
                }
            }
        }
        OracleSpec::Draws { path, column } => {
            let r = Table::read(Path::new(path))?;
            let y = r.column(column).ok_or_else(|| {
                AbcError::NotComparable(format!("{path} has no column '{column}'"))
            })?;
            for (l, t) in &tables {
                if let Some((x, w)) = t.weighted(column) {
                    out.push(draws_row(l, column, path, &x, &w, &y));
                }
            }
        }
        OracleSpec::Auto => {
            let oracle_path = dir.join("oracle.json");
            if oracle_path.exists() {
                let text = std::fs::read_to_string(&oracle_path)
                    .map_err(|e| AbcError::io(&oracle_path, e))?;
                let v: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| AbcError::Parse(format!("{}: {e}", oracle_path.display())))?;
                let entries = ["parameters", "predictive"]
                    .iter()
                    .flat_map(|k| v[*k].as_array().cloned().unwrap_or_default());
                for e in entries {
                    let (Some(col), Some(m), Some(var)) = (
                        e["column"].as_str(),
                        e["mean"].as_f64(),
                        e["variance"].as_f64(),
                    ) else {
                        continue;
                    };
                    for (l, t) in &tables {
                        if let Some((x, w)) = t.weighted(col) {
                            out.push(gaussian_row(l, col, &x, &w, m, var));
                        }
                    }
                }
            }
            let ideal_path = dir.join("ideal").join("draws.csv");
            if ideal_path.exists() {
                let ideal = Table::read(&ideal_path)?;
                for col in &ideal.header {
                    let y = ideal.column(col).unwrap_or_default();
                    for (l, t) in &tables {
                        if let Some((x, w)) = t.weighted(col) {
                            out.push(draws_row(l, col, "ideal", &x, &w, &y));
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(AbcError::NotComparable(format!(
            "no oracle marginal matches a column of '{experiment}' results in {}",
            dir.display()
        )));
    }
    Ok(ComparisonReport {
        experiment,
        comparisons: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_oracle_specs() {
        assert_eq!(OracleSpec::parse("auto").unwrap(), OracleSpec::Auto);
        assert_eq!(
            OracleSpec::parse("gaussian:1.5,2@c").unwrap(),
            OracleSpec::Gaussian {
                mean: 1.5,
                variance: 2.0,
                column: "c".into()
            }
        );
        assert_eq!(
            OracleSpec::parse("draws:ideal/draws.csv@y@101").unwrap(),
            OracleSpec::Draws {
                path: "ideal/draws.csv".into(),
                column: "y@101".into()
            }
        );
        assert!(OracleSpec::parse("gaussian:1,-1@c").is_err());
        assert!(OracleSpec::parse("bogus").is_err());
    }
}
