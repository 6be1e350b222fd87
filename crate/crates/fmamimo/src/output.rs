//! CSV result files.
//!
//! Per (metric, region) curve: `{metric}_r{km:.2}.csv` (or
//! `{metric}_baseline.csv`) with header `value_db,cdf`. Signal and
//! interference samples arrive linear and are rendered in dB relative to
//! unit transmit power; SIR is already in dB and spectral efficiency is
//! written as-is under the same header. `summary.csv` collects median and
//! tail quantiles per curve.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::coordination::RegionMode;
use crate::linear_to_db;
use crate::montecarlo::{EmpiricalCdf, Metric, SweepResult};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("refusing to write an empty CDF for `{metric}`")]
    EmptyCdf { metric: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

fn value_in_output_domain(metric_name: &str, v: f64) -> f64 {
    match metric_name {
        "signal" | "interference" => linear_to_db(v),
        _ => v,
    }
}

/// Writes one CDF curve; returns the path of the written file.
pub fn write_cdf_csv(
    metric_name: &str,
    region: RegionMode,
    cdf: &EmpiricalCdf,
    out_dir: &Path,
) -> Result<PathBuf, OutputError> {
    if cdf.is_empty() {
        return Err(OutputError::EmptyCdf { metric: metric_name.to_string() });
    }
    let path = out_dir.join(format!("{metric_name}_{}.csv", region.file_label()));
    let mut text = String::from("value_db,cdf\n");
    for (&v, &p) in cdf.sorted_values.iter().zip(&cdf.probabilities) {
        let value = value_in_output_domain(metric_name, v);
        text.push_str(&format!("{value:.6},{p:.6}\n"));
    }
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes `summary.csv`: median, 5th and 95th percentile per curve.
pub fn write_summary_csv(result: &SweepResult, out_dir: &Path) -> Result<PathBuf, OutputError> {
    let path = out_dir.join("summary.csv");
    let mut text = String::from("metric,r_coord_km,median_db,p05_db,p95_db\n");
    for metric in Metric::ALL {
        for (region_idx, region) in result.regions.iter().enumerate() {
            let cdf = result.cdf(metric, region_idx);
            let quantile = |p: f64| value_in_output_domain(metric.csv_name(), cdf.quantile(p));
            text.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6}\n",
                metric.csv_name(),
                region.csv_label(),
                quantile(0.5),
                quantile(0.05),
                quantile(0.95),
            ));
        }
    }
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes every per-curve CSV plus the summary; returns all written paths.
pub fn write_all(result: &SweepResult, out_dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut paths = Vec::new();
    for metric in Metric::ALL {
        for (region_idx, &region) in result.regions.iter().enumerate() {
            let cdf = result.cdf(metric, region_idx);
            paths.push(write_cdf_csv(metric.csv_name(), region, cdf, out_dir)?);
        }
    }
    paths.push(write_summary_csv(result, out_dir)?);
    Ok(paths)
}

/// Writes the effective run configuration next to the results, so a result
/// directory is self-describing and reproducible.
pub fn write_config_snapshot(
    config: &crate::config::SimulationConfig,
    out_dir: &Path,
) -> Result<PathBuf, OutputError> {
    let path = out_dir.join("run_config.cfg");
    let mut file = fs::File::create(&path).map_err(io_err(&path))?;
    file.write_all(config.to_file_string().as_bytes()).map_err(io_err(&path))?;
    Ok(path)
}
