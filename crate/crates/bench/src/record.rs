use std::io::Write;

use primalign::{Result as AlignResult, SolverResult};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scene::Scene;

/// One CSV row: a single solver run on a single trial.
///
/// Errors are empty for failed runs; `status` then carries the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub experiment: String,
    pub solver: String,
    pub sigma: f64,
    pub outlier_ratio: f64,
    pub trial: usize,
    /// Radians.
    pub rotation_error: Option<f64>,
    /// Metres.
    pub translation_error: Option<f64>,
    /// Seconds spent in the solve only.
    pub cpu_time: f64,
    pub outliers_injected: usize,
    /// Injected outliers that were flagged.
    pub outliers_detected: usize,
    /// Clean pairs that were flagged.
    pub inliers_rejected: usize,
    pub iterations: usize,
    pub status: String,
}

pub const STATUS_OK: &str = "ok";
pub const STATUS_NOT_CONVERGED: &str = "not-converged";

#[derive(Debug, Clone, Copy)]
pub struct TrialKey<'a> {
    pub experiment: &'a str,
    pub sigma: f64,
    pub outlier_ratio: f64,
    pub trial: usize,
}

impl BenchRecord {
    pub fn from_solve(
        key: TrialKey<'_>,
        solver: &str,
        scene: &Scene,
        outcome: &AlignResult<SolverResult>,
        cpu_time: f64,
    ) -> Self {
        let mut rec = Self::failed(key, solver, scene.outlier_indices.len(), cpu_time, String::new());
        match outcome {
            Ok(res) => {
                let (rot, trans) = res.pose.errors_to(&scene.gt);
                let detected = res
                    .outlier_point_indices
                    .iter()
                    .filter(|i| scene.outlier_indices.binary_search(i).is_ok())
                    .count();
                rec.rotation_error = Some(rot);
                rec.translation_error = Some(trans);
                rec.outliers_detected = detected;
                rec.inliers_rejected = res.outlier_point_indices.len() - detected;
                rec.iterations = res.diagnostics.iterations;
                rec.status = if res.diagnostics.converged { STATUS_OK } else { STATUS_NOT_CONVERGED }.into();
            }
            Err(e) => rec.status = format!("failed: {e}"),
        }
        rec
    }

    pub fn failed(key: TrialKey<'_>, solver: &str, injected: usize, cpu_time: f64, status: String) -> Self {
        Self {
            experiment: key.experiment.to_string(),
            solver: solver.to_string(),
            sigma: key.sigma,
            outlier_ratio: key.outlier_ratio,
            trial: key.trial,
            rotation_error: None,
            translation_error: None,
            cpu_time,
            outliers_injected: injected,
            outliers_detected: 0,
            inliers_rejected: 0,
            iterations: 0,
            status,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.rotation_error.is_some()
    }
}

pub fn write_csv<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Median of the values; `NaN` for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per (solver, sigma, outlier ratio) statistics, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver: String,
    pub sigma: f64,
    pub outlier_ratio: f64,
    pub runs: usize,
    pub failed: usize,
    pub median_rotation_error: f64,
    pub median_translation_error: f64,
    pub median_cpu_time: f64,
    pub outliers_injected: usize,
    pub outliers_detected: usize,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, f64, f64)> = Vec::new();
    for r in records {
        let k = (r.solver.as_str(), r.sigma, r.outlier_ratio);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(solver, sigma, ratio)| {
            let group: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.solver == solver && r.sigma == sigma && r.outlier_ratio == ratio)
                .collect();
            let ok: Vec<&&BenchRecord> = group.iter().filter(|r| r.is_ok()).collect();
            SummaryRow {
                solver: solver.to_string(),
                sigma,
                outlier_ratio: ratio,
                runs: group.len(),
                failed: group.len() - ok.len(),
                median_rotation_error: median(&ok.iter().filter_map(|r| r.rotation_error).collect::<Vec<_>>()),
                median_translation_error: median(&ok.iter().filter_map(|r| r.translation_error).collect::<Vec<_>>()),
                median_cpu_time: median(&group.iter().map(|r| r.cpu_time).collect::<Vec<_>>()),
                outliers_injected: group.iter().map(|r| r.outliers_injected).sum(),
                outliers_detected: group.iter().map(|r| r.outliers_detected).sum(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn csv_round_trip_with_failures_and_quoting() {
        let key = TrialKey {
            experiment: "noise",
            sigma: 0.5,
            outlier_ratio: 0.0,
            trial: 3,
        };
        let mut ok = BenchRecord::failed(key, "horn", 0, 1e-5, STATUS_OK.into());
        ok.rotation_error = Some(0.25);
        ok.translation_error = Some(1.5);
        let bad = BenchRecord::failed(key, "olae", 0, 2e-5, "failed: degenerate, \"collinear\"".into());
        let mut buf = Vec::new();
        write_csv(&mut buf, &[ok.clone(), bad.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "experiment,solver,sigma,outlier_ratio,trial,rotation_error,translation_error,cpu_time,outliers_injected,outliers_detected,inliers_rejected,iterations,status\n"
        ));
        assert!(text.contains("\"failed: degenerate, \"\"collinear\"\"\""));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), vec![ok, bad]);
    }
}
