use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::HarnessError;
use crate::experiment::ExperimentReport;

pub const COLUMNS: [&str; 6] = ["name", "interaction", "coverage", "class", "confidence", "delta"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(HarnessError::Usage(format!(
                "unknown format {other:?}; expected md, csv or json"
            ))),
        }
    }
}

fn percent(fraction: f64) -> String {
    format!("{:.1}%", fraction * 100.0)
}

fn signed_points(fraction: f64) -> String {
    // avoid "-0.0"
    let points = (fraction * 1000.0).round() / 10.0;
    if points == 0.0 {
        "+0.0".into()
    } else {
        format!("{points:+.1}")
    }
}

fn markdown(report: &ExperimentReport) -> String {
    let env = &report.environment;
    let mut out = String::new();
    let _ = writeln!(out, "# Masking experiment\n");
    let _ = writeln!(out, "- model: `{}`", env.model_id);
    let _ = writeln!(out, "- fill: `{}`", env.fill);
    let _ = writeln!(out, "- preprocessing: `{}`", env.preprocessing);
    let _ = writeln!(out, "- k: {}\n", env.k);

    let mut names: Vec<&str> = Vec::new();
    for row in &report.rows {
        if !names.contains(&row.name.as_str()) {
            names.push(&row.name);
        }
    }
    for name in names {
        let _ = writeln!(out, "## {name}\n");
        let _ = writeln!(out, "| interaction | coverage | class | confidence | delta (pts) |");
        let _ = writeln!(out, "|---|---:|---|---:|---:|");
        for row in report.rows.iter().filter(|r| r.name == name) {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                row.interaction,
                percent(row.coverage),
                row.class.replace('|', "\\|"),
                percent(row.confidence),
                signed_points(row.delta)
            );
        }
        out.push('\n');
    }
    if !report.failures.is_empty() {
        let _ = writeln!(out, "## Failures\n");
        for f in &report.failures {
            let _ = writeln!(
                out,
                "- {} / {}: {}",
                f.name,
                f.interaction.as_deref().unwrap_or("image"),
                f.message
            );
        }
    }
    out
}

fn csv(report: &ExperimentReport) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
        w.write_record(COLUMNS)?;
        for row in &report.rows {
            w.write_record([
                row.name.as_str(),
                row.interaction.as_str(),
                &format!("{:.6}", row.coverage),
                row.class.as_str(),
                &format!("{:.6}", row.confidence),
                &format!("{:.6}", row.delta + 0.0),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut writer).expect("writing to a Vec cannot fail");
    writer.into_inner().expect("flushed")
}

/// Renders a report. Output depends only on the report contents.
pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Markdown => markdown(report).into_bytes(),
        ReportFormat::Csv => csv(report),
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
            bytes.push(b'\n');
            bytes
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{Environment, ReportRow};
    use xai_core::FillPolicy;

    fn report(rows: usize) -> ExperimentReport {
        ExperimentReport {
            environment: Environment {
                model_id: "m".into(),
                fill: FillPolicy::DatasetMean,
                preprocessing: "direct_resize_224".into(),
                k: 5,
            },
            rows: (0..rows)
                .map(|i| ReportRow {
                    name: "dog".into(),
                    interaction: if i == 0 { "baseline".into() } else { format!("m{i}") },
                    coverage: 0.25 * i as f64,
                    class: "crane, bird".into(),
                    class_index: 134,
                    confidence: 0.487,
                    delta: -0.1 * i as f64,
                    baseline_class_confidence: 0.487,
                    top: vec![],
                })
                .collect(),
            failures: vec![],
        }
    }

    #[test]
    fn csv_one_row() {
        let text = String::from_utf8(render_report(&report(1), ReportFormat::Csv)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, [
            "name,interaction,coverage,class,confidence,delta",
            "dog,baseline,0.000000,\"crane, bird\",0.487000,0.000000",
        ]);
    }

    #[test]
    fn rendering_is_deterministic() {
        let r = report(3);
        for format in [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json] {
            assert_eq!(render_report(&r, format), render_report(&r, format));
        }
    }

    #[test]
    fn markdown_shows_percentages() {
        let text = String::from_utf8(render_report(&report(2), ReportFormat::Markdown)).unwrap();
        assert!(text.contains("| baseline | 0.0% | crane, bird | 48.7% | +0.0 |"), "{text}");
        assert!(text.contains("| m1 | 25.0% | crane, bird | 48.7% | -10.0 |"), "{text}");
    }

    #[test]
    fn json_round_trips() {
        let r = report(2);
        let back: ExperimentReport =
            serde_json::from_slice(&render_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }
}
