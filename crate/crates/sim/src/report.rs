//! CSV and metadata output.
//!
//! Column order is fixed and floats print as nine-significant-digit
//! scientific notation, so outputs diff cleanly across platforms and
//! thread counts.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use rfs_fusion_core::diagnostics::DiagnosticsReport;

use crate::engine::{Aggregates, RunRecord};
use crate::scenario::EstimatorKind;
use crate::SimError;

/// Nine significant digits.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.8e}")
    }
}

pub fn per_run_csv(records: &[RunRecord], estimator: EstimatorKind) -> String {
    let mut out = String::from("run,step,sensor,card_true,card_est,ospa\n");
    for record in records {
        for row in &record.steps {
            if row.estimator == estimator {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    row.run,
                    row.step,
                    row.sensor,
                    row.card_true,
                    row.card_est,
                    fmt_float(row.ospa)
                );
            }
        }
    }
    out
}

pub fn aggregate_csv(aggregates: &Aggregates) -> String {
    let mut out =
        String::from("estimator,sensor,step,card_true,card_mean,card_std,ospa_mean,ospa_std\n");
    for row in &aggregates.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.estimator.as_str(),
            row.sensor,
            row.step,
            row.card_true,
            fmt_float(row.card_mean),
            fmt_float(row.card_std),
            fmt_float(row.ospa_mean),
            fmt_float(row.ospa_std)
        );
    }
    out
}

pub fn summary_csv(aggregates: &Aggregates) -> String {
    let mut out = String::from("estimator,sensor,ospa_post_transient,card_abs_error\n");
    for row in &aggregates.summary {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.estimator.as_str(),
            row.sensor,
            fmt_float(row.ospa_post_transient),
            fmt_float(row.card_abs_error)
        );
    }
    out
}

pub const DIAGNOSTICS_HEADER: &str =
    "time,G_labeled,G_unlabeled,d_G,d_G_upper,p_yes_labeled,p_yes_unlabeled";

pub fn diagnostics_row_csv(time: u32, r: &DiagnosticsReport) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        time,
        fmt_float(r.g_labeled),
        fmt_float(r.g_unlabeled),
        fmt_float(r.d_g),
        fmt_float(r.d_g_upper),
        fmt_float(r.p_yes_labeled),
        fmt_float(r.p_yes_unlabeled)
    )
}

pub fn diagnostics_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("run,");
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for record in records {
        for row in &record.diagnostics {
            let _ = writeln!(out, "{},{}", record.run, diagnostics_row_csv(row.step, &row.report));
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub scenario: String,
    pub seed: u64,
    pub runs: u64,
    pub jobs: usize,
    pub config_hash: String,
    pub overrides: Vec<String>,
    pub estimators: Vec<String>,
    pub settle_steps: u32,
    pub transient_events: Vec<u32>,
    pub post_transient_steps: Vec<u32>,
    pub error_count: usize,
}

pub fn write_outputs(
    outdir: &Path,
    records: &[RunRecord],
    aggregates: &Aggregates,
    estimators: &[EstimatorKind],
    metadata: &Metadata,
    diagnostics_enabled: bool,
) -> Result<(), SimError> {
    std::fs::create_dir_all(outdir)?;
    for estimator in estimators {
        std::fs::write(
            outdir.join(format!("{}.csv", estimator.as_str())),
            per_run_csv(records, *estimator),
        )?;
    }
    std::fs::write(outdir.join("aggregate.csv"), aggregate_csv(aggregates))?;
    std::fs::write(outdir.join("summary.csv"), summary_csv(aggregates))?;
    if diagnostics_enabled {
        std::fs::write(outdir.join("diagnostics.csv"), diagnostics_csv(records))?;
    }
    let json = serde_json::to_string_pretty(metadata)?;
    std::fs::write(outdir.join("metadata.json"), json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_nine_significant_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt_float(123456789.0), "1.23456789e8");
        assert_eq!(fmt_float(0.0), "0.00000000e0");
    }
}
