//! Report emission: `report.json`, per-country forecast and benchmark CSVs,
//! and persisted model documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pipeline::{CountryError, CountryOutcome, CountryReport, PipelineConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level `report.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config_echo: PipelineConfig,
    pub countries: Vec<CountryReport>,
    pub errors: Vec<CountryError>,
}

impl Report {
    pub fn new(
        config: &PipelineConfig,
        countries: Vec<CountryReport>,
        errors: Vec<CountryError>,
    ) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            config_echo: config.clone(),
            countries,
            errors,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }
}

fn format_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `report.json` plus one `forecast_<ISO3>.csv` and one
/// `benchmark_<ISO3>.csv` per country. Returns the created paths.
pub fn emit_report(
    report: &Report,
    outcomes: &[CountryOutcome],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let report_path = out_dir.join("report.json");
    std::fs::write(&report_path, report.to_json()?)?;
    written.push(report_path);

    for outcome in outcomes {
        written.push(write_forecast_csv(outcome, out_dir)?);
        written.push(write_benchmark_csv(&outcome.report, out_dir)?);
    }
    Ok(written)
}

/// History then forecast rows: `year,point,lower,upper,kind`. History rows
/// leave the bounds empty.
pub fn write_forecast_csv(outcome: &CountryOutcome, out_dir: &Path) -> Result<PathBuf> {
    let report = &outcome.report;
    let mut text = String::from("year,point,lower,upper,kind\n");
    for (i, &value) in outcome.history.values.iter().enumerate() {
        text.push_str(&format!(
            "{},{},,,history\n",
            outcome.history.year_at(i),
            value
        ));
    }
    for entry in &report.forecast {
        text.push_str(&format!(
            "{},{},{},{},forecast\n",
            entry.year, entry.point, entry.lower, entry.upper
        ));
    }
    let path = out_dir.join(format!("forecast_{}.csv", report.country));
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Benchmark table in published layout: `model,mae,rmse,r2,mape`, one row
/// per family in ranked order.
pub fn write_benchmark_csv(report: &CountryReport, out_dir: &Path) -> Result<PathBuf> {
    let mut text = String::from("model,mae,rmse,r2,mape\n");
    for row in &report.benchmark {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.model,
            row.mae,
            row.rmse,
            format_opt(row.r2),
            row.mape
        ));
    }
    let path = out_dir.join(format!("benchmark_{}.csv", report.country));
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Persists each selected model as `models/model_<ISO3>.json` so a later
/// invocation can reload and re-forecast without refitting.
pub fn persist_models(outcomes: &[CountryOutcome], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref().join("models");
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    for outcome in outcomes {
        let path = dir.join(format!("model_{}.json", outcome.report.country));
        std::fs::write(&path, outcome.model.to_json()?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_serializes_with_empty_countries() {
        let config = PipelineConfig::default();
        let report = Report::new(&config, Vec::new(), Vec::new());
        let text = report.to_json().unwrap();
        assert!(text.contains("\"schema_version\": 1"));
        assert!(text.contains("\"countries\": []"));
        let parsed = Report::from_json(&text).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn emit_report_writes_one_json_and_no_csvs_for_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig::default();
        let report = Report::new(&config, Vec::new(), Vec::new());
        let written = emit_report(&report, &[], dir.path()).unwrap();
        assert_eq!(written.len(), 1);
        assert!(dir.path().join("report.json").exists());
    }
}
