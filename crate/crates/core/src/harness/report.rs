use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::experiment::ExperimentReport;
use super::stats::RateEstimate;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

pub const CSV_HEADER: [&str; 6] = [
    "metric",
    "count",
    "samples",
    "value",
    "std_error",
    "analytic",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn scalar_row(metric: &str, value: impl ToString) -> [String; 6] {
    [
        metric.to_string(),
        String::new(),
        String::new(),
        value.to_string(),
        String::new(),
        String::new(),
    ]
}

fn rate_row(metric: &str, r: &RateEstimate) -> [String; 6] {
    [
        metric.to_string(),
        r.count.to_string(),
        r.samples.to_string(),
        opt(r.rate),
        opt(r.std_error),
        opt(r.analytic),
    ]
}

fn csv_rows(report: &ExperimentReport) -> Vec<[String; 6]> {
    let c = &report.config;
    vec![
        scalar_row("config.n", c.n),
        scalar_row("config.sessions", c.sessions),
        scalar_row("config.attack", c.attack),
        scalar_row("config.seed", c.seed),
        scalar_row("config.t_c", c.t_c),
        scalar_row("config.max_rounds", c.max_rounds),
        scalar_row("config.attack_probability", c.attack_probability),
        scalar_row(
            "config.decode_policy",
            serde_json::to_value(c.decode_policy)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
        ),
        scalar_row("sessions", report.sessions),
        scalar_row("rounds", report.rounds),
        scalar_row("sessions_established", report.sessions_established),
        scalar_row("sessions_terminated", report.sessions_terminated),
        rate_row("detection", &report.detection),
        rate_row("undetected_round", &report.undetected_round),
        scalar_row(
            "undetected_round_log10_analytic",
            report.undetected_round_log10_analytic,
        ),
        rate_row("key_agreement", &report.key_agreement),
        rate_row("eve_guess_accuracy", &report.eve_guess_accuracy),
        scalar_row(
            "eve_mutual_information_bits",
            opt(report.eve_mutual_information_bits),
        ),
        rate_row("verdict_agreement", &report.verdict_agreement),
    ]
}

/// Serializes a report; the same report always yields the same bytes.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report)?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(CSV_HEADER)?;
            for row in csv_rows(report) {
                writer.write_record(&row)?;
            }
            let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

pub fn parse_json_report(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

/// Serializes first, then writes, so a failure never leaves a partial file behind.
pub fn write_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = emit_report(report, format)?;
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::{run_experiment, ExperimentConfig};

    fn report() -> ExperimentReport {
        run_experiment(&ExperimentConfig {
            n: 4,
            sessions: 300,
            attack: "intercept-ba".parse().unwrap(),
            seed: 42,
            ..ExperimentConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn json_round_trips() {
        let r = report();
        let text = emit_report(&r, ReportFormat::Json).unwrap();
        assert_eq!(parse_json_report(&text).unwrap(), r);
        assert!(text.contains("\"attack\": \"intercept-ba\""));
        assert!(text.contains("\"seed\": 42"));
    }

    #[test]
    fn csv_has_header_and_one_row_per_metric() {
        let text = emit_report(&report(), ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,count,samples,value,std_error,analytic");
        assert_eq!(lines.len(), 1 + 19);
        assert!(lines.iter().any(|l| l.starts_with("detection,")));
        assert!(lines.contains(&"config.attack,,,intercept-ba,,"));
    }

    #[test]
    fn unwritable_path() {
        let err = write_report(
            &report(),
            ReportFormat::Json,
            Path::new("/nonexistent-dir/x/report.json"),
        );
        assert!(matches!(err, Err(Error::Io(_))));
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
