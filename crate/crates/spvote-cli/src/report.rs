//! Report files: delimited metric tables and static SVG charts.
//!
//! Output is byte-deterministic for a given run output: rows are written in
//! their (already sorted) order, every float renders as `{:.6}`, and charts
//! are assembled from plain strings. Table footers (`#` comment lines)
//! document the CI convention and averaging units.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::experiment::{CalibRow, RunOutput};
use crate::metrics::{QuestionRow, SummaryRow};

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

const SUMMARY_FOOTER: &str = "\
# ci: 95% normal approximation, half_width = 1.96 * sd / sqrt(n); blank when n < 2
# units: sp_* and base_* rows average per-question values; vote_* and pred_* rows average per-response values
# clustering: responses within a question are treated as independent draws; voter-level clustering is not modeled
";

/// Writes the summary table. Footers are omitted when there are no rows, so
/// an empty report is exactly its header.
pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["format", "domain", "metric", "mean", "ci_half_width", "n"])?;
    for r in rows {
        writer.write_record([
            r.format.as_str(),
            r.domain.as_str(),
            r.metric.as_str(),
            &f6(r.mean),
            &r.half_width.map(f6).unwrap_or_default(),
            &r.n.to_string(),
        ])?;
    }
    let mut bytes = writer
        .into_inner()
        .map_err(|e| CliError::internal(e.to_string()))?;
    if !rows.is_empty() {
        bytes.extend_from_slice(SUMMARY_FOOTER.as_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a summary table back, skipping footer comments.
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.is_io_error() {
            true => CliError::validation(format!("cannot open {}: {e}", path.display())),
            false => e.into(),
        })?;
    let headers: Vec<&str> = reader.headers()?.iter().collect();
    if headers != ["format", "domain", "metric", "mean", "ci_half_width", "n"] {
        return Err(CliError::validation(format!(
            "summary header mismatch: {headers:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let at = |i: usize| record.get(i).unwrap_or("").to_string();
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| CliError::validation(format!("bad number {s:?} in summary")))
        };
        let hw = at(4);
        rows.push(SummaryRow {
            format: at(0),
            domain: at(1),
            metric: at(2),
            mean: parse(&at(3))?,
            half_width: if hw.is_empty() { None } else { Some(parse(&hw)?) },
            n: at(5)
                .parse()
                .map_err(|_| CliError::validation("bad n in summary".to_string()))?,
        });
    }
    Ok(rows)
}

const RAW_FOOTER: &str = "\
# vote_* and pred_* values are per-question means of per-response errors
";

pub fn write_raw(path: &Path, rows: &[QuestionRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["question_id", "format", "domain", "metric", "value"])?;
    for r in rows {
        writer.write_record([
            r.question_id.as_str(),
            r.format.as_str(),
            r.domain.as_str(),
            r.metric.as_str(),
            &f6(r.value),
        ])?;
    }
    let mut bytes = writer
        .into_inner()
        .map_err(|e| CliError::internal(e.to_string()))?;
    if !rows.is_empty() {
        bytes.extend_from_slice(RAW_FOOTER.as_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn write_calib(path: &Path, rows: &[CalibRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["format", "alpha", "beta", "loss", "train_questions"])?;
    for r in rows {
        writer.write_record([
            r.format.as_str(),
            &f6(r.alpha),
            &f6(r.beta),
            &f6(r.loss),
            &r.train_questions.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_failures(path: &Path, failures: &[String]) -> Result<()> {
    let mut text = String::from("failed format slices:\n");
    for f in failures {
        text.push_str("  ");
        text.push_str(f);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Renders one metric's pooled (domain = "all") rows as a bar chart with CI
/// whiskers.
pub fn render_chart(metric: &str, rows: &[&SummaryRow]) -> String {
    let width = 640.0;
    let height = 360.0;
    let (left, right, top, bottom) = (70.0, 20.0, 44.0, 70.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let upper = rows
        .iter()
        .map(|r| r.mean + r.half_width.unwrap_or(0.0))
        .fold(0.0f64, f64::max);
    let y_max = if upper > 0.0 { upper * 1.1 } else { 1.0 };
    let y = |v: f64| top + plot_h * (1.0 - v / y_max);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{metric}</text>\n",
        width / 2.0
    ));

    // Axis and ticks.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let yy = y(v);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{yy:.2}\" x2=\"{left}\" y2=\"{yy:.2}\" stroke=\"black\"/>\n",
            left - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{:.3}</text>\n",
            left - 8.0,
            yy + 4.0,
            v
        ));
    }

    let n = rows.len().max(1) as f64;
    let slot = plot_w / n;
    let bar_w = slot * 0.6;
    for (i, r) in rows.iter().enumerate() {
        let x0 = left + slot * i as f64 + (slot - bar_w) / 2.0;
        let y0 = y(r.mean);
        svg.push_str(&format!(
            "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{bar_w:.2}\" height=\"{:.2}\" \
             fill=\"#4477aa\"/>\n",
            top + plot_h - y0
        ));
        if let Some(hw) = r.half_width {
            let xc = x0 + bar_w / 2.0;
            let (y1, y2) = (y((r.mean + hw).min(y_max)), y((r.mean - hw).max(0.0)));
            svg.push_str(&format!(
                "<line x1=\"{xc:.2}\" y1=\"{y1:.2}\" x2=\"{xc:.2}\" y2=\"{y2:.2}\" \
                 stroke=\"black\"/>\n"
            ));
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y1:.2}\" x2=\"{:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n",
                xc - 5.0,
                xc + 5.0
            ));
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y2:.2}\" x2=\"{:.2}\" y2=\"{y2:.2}\" stroke=\"black\"/>\n",
                xc - 5.0,
                xc + 5.0
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            x0 + bar_w / 2.0,
            top + plot_h + 16.0,
            r.format
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"middle\">{}</text>\n",
            x0 + bar_w / 2.0,
            y0 - 4.0,
            f6(r.mean)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes charts for every metric that has pooled rows; returns the paths.
pub fn write_charts(out_dir: &Path, rows: &[SummaryRow]) -> Result<Vec<PathBuf>> {
    let mut metrics: Vec<&str> = rows
        .iter()
        .filter(|r| r.domain == "all")
        .map(|r| r.metric.as_str())
        .collect();
    metrics.sort_unstable();
    metrics.dedup();
    let mut paths = Vec::new();
    for metric in metrics {
        let slice: Vec<&SummaryRow> = rows
            .iter()
            .filter(|r| r.domain == "all" && r.metric == metric)
            .collect();
        let path = out_dir.join(format!("chart_{metric}.svg"));
        fs::write(&path, render_chart(metric, &slice))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the full report for a run; returns every file written.
pub fn write_report(out_dir: &Path, run: &RunOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();

    let summary = out_dir.join("summary.csv");
    write_summary(&summary, &run.summary)?;
    paths.push(summary);

    let raw = out_dir.join("raw.csv");
    write_raw(&raw, &run.raw)?;
    paths.push(raw);

    if !run.calib.is_empty() {
        let calib = out_dir.join("calibration.csv");
        write_calib(&calib, &run.calib)?;
        paths.push(calib);
    }
    if !run.failures.is_empty() {
        let failures = out_dir.join("failures.txt");
        write_failures(&failures, &run.failures)?;
        paths.push(failures);
    }
    paths.extend(write_charts(out_dir, &run.summary)?);
    Ok(paths)
}
