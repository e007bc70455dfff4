//! Per-series data files for plotting SNR or runtime against `M/N`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::sweep::{Status, TrialRecord};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Snr,
    Runtime,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Snr => "snr",
            Metric::Runtime => "runtime",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" => Ok(Metric::Snr),
            "runtime" => Ok(Metric::Runtime),
            _ => Err(invalid(format!("unknown metric {s:?}; expected snr or runtime"))),
        }
    }
}

/// Aggregate of one `(algorithm, iters, M/N)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub algorithm: String,
    pub iters: usize,
    pub m_over_n: f64,
    pub mean: f64,
    pub stderr: f64,
    /// Finite samples behind `mean`.
    pub samples: usize,
    /// Exact recoveries, excluded from the SNR mean.
    pub exact: usize,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups feasible rows by series and `M/N`; rows are sorted by `M/N`.
pub fn summarize(records: &[TrialRecord], metric: Metric) -> Vec<PointSummary> {
    let mut cells: BTreeMap<(String, usize, u64), (f64, Vec<f64>, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status != Status::Infeasible) {
        let value = match metric {
            Metric::Snr => r.snr_db,
            Metric::Runtime => r.runtime_s,
        };
        let Some(value) = value else { continue };
        // Nonnegative floats order the same as their bit patterns.
        let key = (r.algorithm.clone(), r.iters, r.m_over_n.to_bits());
        let cell = cells.entry(key).or_insert_with(|| (r.m_over_n, Vec::new(), 0));
        if value.is_finite() {
            cell.1.push(value);
        } else {
            cell.2 += 1;
        }
    }
    cells
        .into_iter()
        .map(|((algorithm, iters, _), (m_over_n, values, exact))| {
            let (mean, stderr) = if values.is_empty() {
                (f64::INFINITY, 0.0)
            } else {
                mean_stderr(&values)
            };
            PointSummary {
                algorithm,
                iters,
                m_over_n,
                mean,
                stderr,
                samples: values.len(),
                exact,
            }
        })
        .collect()
}

/// Writes one whitespace-delimited file per `(algorithm, iters)` series and a
/// manifest listing them. Returns the series paths in manifest order.
pub fn emit_plot_data(records: &[TrialRecord], metric: Metric, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = summarize(records, metric);
    if summary.is_empty() {
        return Err(invalid("no feasible rows with this metric"));
    }
    fs::create_dir_all(out_dir)?;
    let mut series: BTreeMap<(String, usize), Vec<&PointSummary>> = BTreeMap::new();
    for p in &summary {
        series.entry((p.algorithm.clone(), p.iters)).or_default().push(p);
    }

    let mut paths = Vec::new();
    let mut manifest = String::from("# file algorithm iters points\n");
    for ((algorithm, iters), points) in &series {
        let name = format!("{metric}_{algorithm}_{iters}.dat");
        let mut text = format!("# {metric} {algorithm} iters={iters}\n# m_over_n mean stderr samples exact\n");
        for p in points {
            text.push_str(&format!("{} {} {} {} {}\n", p.m_over_n, p.mean, p.stderr, p.samples, p.exact));
        }
        let path = out_dir.join(&name);
        fs::write(&path, text)?;
        manifest.push_str(&format!("{name} {algorithm} {iters} {}\n", points.len()));
        paths.push(path);
    }
    fs::write(out_dir.join(format!("series_{metric}.txt")), manifest)?;
    Ok(paths)
}
