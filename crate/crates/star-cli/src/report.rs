//! Solve-report JSON emission.
//!
//! Schema: `{ "iterations": N, "residuals": [...], "objective": [...],
//! "wall_ms": T }`.

use std::fs;
use std::path::Path;

use serde_json::json;
use star_core::solver::SolveReport;

use crate::{CliError, Result};

pub fn report_to_json(report: &SolveReport) -> String {
    let doc = json!({
        "iterations": report.iterations,
        "residuals": report.residuals,
        "objective": report.objective,
        "wall_ms": report.wall_ms,
    });
    serde_json::to_string_pretty(&doc).expect("report serialization cannot fail")
}

pub fn write_report(path: &Path, report: &SolveReport) -> Result<()> {
    fs::write(path, report_to_json(report) + "\n")
        .map_err(|e| CliError::Format(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_has_the_documented_keys() {
        let r = SolveReport {
            iterations: 2,
            residuals: vec![0.5, 0.25],
            objective: vec![10.0, 5.0],
            wall_ms: 1.5,
            degenerate_a_stages: vec![],
        };
        let text = report_to_json(&r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["iterations"], 2);
        assert_eq!(v["residuals"].as_array().unwrap().len(), 2);
        assert_eq!(v["objective"].as_array().unwrap().len(), 2);
        assert!(v["wall_ms"].is_number());
    }
}
