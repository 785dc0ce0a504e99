//! Pass/fail records and report serialization.

use crate::error::{Error, Result};
use crate::estimators::ScalingFit;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// How a check compares its fitted number against the prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|fitted - predicted| <= tolerance`.
    Slope,
    /// `fitted <= predicted + tolerance`.
    Upper,
    /// `fitted >= predicted - tolerance`.
    Lower,
    /// `|fitted - predicted| <= tolerance`, used with zero tolerance for
    /// bookkeeping identities.
    Exact,
}

/// One verdict: a predicted number, the fitted number, and the outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub kind: CheckKind,
    pub predicted: f64,
    pub fitted: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<ScalingFit>,
}

impl CheckRecord {
    pub fn new(
        check_id: impl Into<String>,
        kind: CheckKind,
        predicted: f64,
        fitted: f64,
        tolerance: f64,
    ) -> Self {
        let pass = match kind {
            CheckKind::Slope | CheckKind::Exact => (fitted - predicted).abs() <= tolerance,
            CheckKind::Upper => fitted <= predicted + tolerance,
            CheckKind::Lower => fitted >= predicted - tolerance,
        };
        CheckRecord {
            check_id: check_id.into(),
            kind,
            predicted,
            fitted,
            tolerance,
            pass,
            fit: None,
        }
    }

    pub fn slope(
        check_id: impl Into<String>,
        predicted: f64,
        fit: ScalingFit,
        tolerance: f64,
    ) -> Self {
        let mut rec = CheckRecord::new(check_id, CheckKind::Slope, predicted, fit.slope, tolerance);
        rec.fit = Some(fit);
        rec
    }
}

/// Everything one scenario run produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub checks: Vec<CheckRecord>,
    pub overall_pass: bool,
    /// Effective configuration, echoed so the run is reproducible.
    pub config: BTreeMap<String, String>,
    /// Not serialized: wall time varies between runs while emitted
    /// artifacts must stay byte-identical.
    #[serde(skip, default)]
    pub wall_time_secs: f64,
}

impl ScenarioReport {
    pub fn new(
        name: impl Into<String>,
        checks: Vec<CheckRecord>,
        config: BTreeMap<String, String>,
    ) -> Self {
        let overall_pass = checks.iter().all(|c| c.pass);
        ScenarioReport {
            name: name.into(),
            checks,
            overall_pass,
            config,
            wall_time_secs: 0.0,
        }
    }

    /// One human-readable line per check.
    pub fn render_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}/{}: kind={:?} predicted={} fitted={} tolerance={}",
                    if c.pass { "PASS" } else { "FAIL" },
                    self.name,
                    c.check_id,
                    c.kind,
                    c.predicted,
                    c.fitted,
                    c.tolerance
                )
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown report format '{other}', expected json or csv"
            ))),
        }
    }
}

/// Writes a report; identical reports serialize to identical bytes.
pub fn emit_report(report: &ScenarioReport, format: ReportFormat, path: &Path) -> Result<()> {
    let mut file =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut file, report)?;
            file.write_all(b"\n")
                .map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        ReportFormat::Csv => {
            let mut out = String::from("check_id,kind,predicted,fitted,tolerance,pass\n");
            for c in &report.checks {
                out.push_str(&format!(
                    "{},{:?},{},{},{},{}\n",
                    c.check_id, c.kind, c.predicted, c.fitted, c.tolerance, c.pass
                ));
            }
            file.write_all(out.as_bytes())
                .map_err(|e| Error::io(path.display().to_string(), e))?;
        }
    }
    Ok(())
}

/// Reads a JSON report back.
pub fn read_report_json(path: &Path) -> Result<ScenarioReport> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&text)?)
}
