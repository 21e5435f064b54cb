//! Scan reports: per-point rows, uniformity statistics, persistence.
//!
//! Rows serialise to CSV with the fixed header
//! `re,im,region_ok,p,q,probe,iters,restarts,flag`; everything else
//! (witness checksums, scaled probes, timings, the fitted slope) lives in
//! the JSON summary. Timings never enter the CSV, so two runs with the
//! same seed produce byte-identical row files.

use serde::Serialize;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One probed (or skipped) spectral point.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub re: f64,
    pub im: f64,
    pub region_ok: bool,
    pub p: f64,
    pub q: f64,
    /// Probe value; NaN when the point was skipped or the solver failed.
    pub probe: f64,
    pub iters: usize,
    pub restarts: usize,
    /// `ok`, `skip-spectrum`, `skip-disk`, or `near-eigenvalue`.
    pub flag: String,
    /// Probe scaled by `|Re|^w` for the scaling-law fit.
    pub scaled_probe: f64,
    /// FNV checksum of the witness coefficients (0 when skipped).
    pub witness_checksum: u64,
    /// Wall-clock per point; excluded from the CSV on purpose.
    pub elapsed_ms: u128,
}

impl ScanRow {
    pub fn is_ok(&self) -> bool {
        self.flag == "ok"
    }
}

/// Least-squares slope of `y` against `x` with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

impl SlopeFit {
    /// The quantity compared against the uniformity threshold.
    pub fn upper(&self) -> f64 {
        self.slope + 2.0 * self.stderr
    }
}

/// Ordinary least squares on `(x, y)`; needs three points for a finite
/// standard error.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let n = xs.len();
    if n != ys.len() || n < 3 {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs at least 3 matched points, got {n}/{}",
            ys.len()
        )));
    }
    let nf = n as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "slope fit is degenerate: all abscissae equal".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ss_res / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        stderr,
        points: n,
    })
}

/// Aggregate of a scan: extremes, the uniformity fit, verdicts, counts.
#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    /// Max probe over `ok` rows (NaN if none probed).
    pub max_probe: f64,
    /// Fit of `log(probe · |Re|^w)` against `log |Re|` over `ok` rows.
    pub slope: Option<SlopeFit>,
    pub weight_exponent: f64,
    pub slope_threshold: f64,
    /// `slope + 2·stderr ≤ threshold`; None when no fit was requested.
    pub uniform: Option<bool>,
    pub flag_counts: BTreeMap<String, usize>,
    pub total_ms: u128,
}

/// A full scan: labelled rows plus their summary.
#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub label: String,
    pub rows: Vec<ScanRow>,
    pub summary: ScanSummary,
}

impl ScanReport {
    /// Builds the summary from rows; the slope fit runs over `ok` rows
    /// when `fit` is set.
    pub fn new(
        label: &str,
        rows: Vec<ScanRow>,
        weight_exponent: f64,
        slope_threshold: f64,
        fit: bool,
    ) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for row in &rows {
            *counts.entry(row.flag.clone()).or_insert(0) += 1;
        }
        let oks: Vec<&ScanRow> = rows.iter().filter(|r| r.is_ok()).collect();
        let max_probe = oks
            .iter()
            .map(|r| r.probe)
            .fold(f64::NAN, |acc, v| if acc.is_nan() { v } else { acc.max(v) });
        let slope = if fit {
            let xs: Vec<f64> = oks.iter().map(|r| r.re.abs().ln()).collect();
            let ys: Vec<f64> = oks.iter().map(|r| r.scaled_probe.ln()).collect();
            Some(fit_slope(&xs, &ys)?)
        } else {
            None
        };
        let uniform = slope.map(|s| s.upper() <= slope_threshold);
        let total_ms = rows.iter().map(|r| r.elapsed_ms).sum();
        Ok(ScanReport {
            label: label.to_string(),
            rows,
            summary: ScanSummary {
                max_probe,
                slope,
                weight_exponent,
                slope_threshold,
                uniform,
                flag_counts: counts,
                total_ms,
            },
        })
    }

    /// CSV rendering with the fixed header; deterministic for a fixed
    /// seed because no timing column is included.
    pub fn csv(&self) -> String {
        let mut out = String::from("re,im,region_ok,p,q,probe,iters,restarts,flag\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.re, r.im, r.region_ok, r.p, r.q, r.probe, r.iters, r.restarts, r.flag
            );
        }
        out
    }

    /// Writes `<label>.csv` and `<label>.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.label)), self.csv())?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialisation failed: {e}")))?;
        std::fs::write(dir.join(format!("{}.json", self.label)), json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(re: f64, probe: f64, flag: &str) -> ScanRow {
        ScanRow {
            re,
            im: 0.5,
            region_ok: true,
            p: 1.2,
            q: 6.0,
            probe,
            iters: 10,
            restarts: 2,
            flag: flag.to_string(),
            scaled_probe: probe,
            witness_checksum: 7,
            elapsed_ms: 3,
        }
    }

    #[test]
    fn slope_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.25 * x).collect();
        let fit = fit_slope(&xs, &ys).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn slope_fit_stderr_reflects_noise() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 4.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 0.1 * x + if i % 2 == 0 { 0.05 } else { -0.05 })
            .collect();
        let fit = fit_slope(&xs, &ys).unwrap();
        assert!((fit.slope - 0.1).abs() < 0.01);
        assert!(fit.stderr > 1e-4);
        assert!(fit.upper() > fit.slope);
    }

    #[test]
    fn summary_max_is_over_ok_rows_only() {
        let rows = vec![
            row(2.0, 1.0, "ok"),
            row(3.0, f64::NAN, "skip-spectrum"),
            row(4.0, 2.5, "ok"),
            row(5.0, 2.0, "ok"),
        ];
        let report = ScanReport::new("t", rows, 0.0, 0.1, true).unwrap();
        assert_eq!(report.summary.max_probe, 2.5);
        assert_eq!(report.summary.flag_counts["ok"], 3);
        assert_eq!(report.summary.flag_counts["skip-spectrum"], 1);
    }

    #[test]
    fn csv_has_fixed_header_and_no_timing() {
        let report = ScanReport::new("t", vec![row(2.0, 1.0, "ok")], 0.0, 0.1, false).unwrap();
        let csv = report.csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "re,im,region_ok,p,q,probe,iters,restarts,flag"
        );
        let data = lines.next().unwrap();
        assert_eq!(data.split(',').count(), 9);
        assert!(!csv.contains("elapsed"));
    }
}
