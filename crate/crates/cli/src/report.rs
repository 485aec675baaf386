//! JSON report documents.
//!
//! Schema (version 1): an object with `schema_version` and `report`, where
//! `report` holds `provenance` (tool version, sport, model, parameter hash,
//! input checksums), `frame_values` (`frame`, `value`), `ratio_series`,
//! `max_vframe`, `timing` (one record per offset, ascending: `xi`,
//! `v_scenario`, `argmax_frame`, ...), `outcome_summary`, `correlations`,
//! `log_loss`, `notes` and `skipped` (`[frame, reason]` pairs).

use std::path::Path;

use serde::{Deserialize, Serialize};
use spacefield::evaluation::EvaluationReport;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportDocument {
    schema_version: u32,
    report: EvaluationReport,
}

pub fn report_to_string(report: &EvaluationReport) -> Result<String, CliError> {
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION,
        report: report.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report(text: &str) -> Result<EvaluationReport, CliError> {
    let doc: ReportDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "report schema {} is not supported (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    Ok(doc.report)
}

/// Writes the report and returns the bytes written.
pub fn export_report(report: &EvaluationReport, path: &Path) -> Result<Vec<u8>, CliError> {
    let bytes = report_to_string(report)?.into_bytes();
    std::fs::write(path, &bytes).map_err(|e| CliError::io(path, e))?;
    Ok(bytes)
}

pub fn read_report(path: &Path) -> Result<EvaluationReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_report(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spacefield::crsv::{ScenarioRecord, TimingReport};

    #[test]
    fn empty_report_is_valid() {
        let r = EvaluationReport::default();
        let text = report_to_string(&r).unwrap();
        assert!(text.contains("\"frame_values\": []"));
        assert_eq!(parse_report(&text).unwrap(), r);
    }

    #[test]
    fn scenario_records_keep_order() {
        let record = |xi: i64, v: f64| ScenarioRecord {
            xi,
            v_scenario: v,
            argmax_frame: 3,
            velocity_fallback: false,
            series: vec![v, v * 0.5],
            start_frame: 5,
        };
        let r = EvaluationReport {
            timing: vec![TimingReport {
                v_timing: 0.1 - 0.3,
                best_alternative: 10,
                scenarios: vec![record(-10, 0.2), record(0, 0.1), record(10, 0.3)],
            }],
            ..Default::default()
        };
        let back = parse_report(&report_to_string(&r).unwrap()).unwrap();
        let xis: Vec<i64> = back.timing[0].scenarios.iter().map(|s| s.xi).collect();
        assert_eq!(xis, vec![-10, 0, 10]);
        assert_eq!(back, r);
    }

    #[test]
    fn wrong_schema_rejected() {
        let text = report_to_string(&EvaluationReport::default())
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(parse_report(&text), Err(CliError::Config(_))));
    }
}
