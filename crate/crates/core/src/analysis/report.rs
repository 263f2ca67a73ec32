use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::{Report, ReportRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

const COLUMNS: [&str; 12] = [
    "label",
    "level",
    "status",
    "p1",
    "p2",
    "p3",
    "z",
    "change_pct",
    "gap",
    "nodes",
    "relaxed_service",
    "violations",
];

fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn record(row: &ReportRow, timings: bool) -> Vec<String> {
    let mut out = vec![
        row.label.clone(),
        row.level.to_string(),
        row.status.to_string(),
        cell(row.p1),
        cell(row.p2),
        cell(row.p3),
        cell(row.z),
        cell(row.change_pct),
        cell(row.gap),
        row.nodes.to_string(),
        row.relaxed_service.to_string(),
        row.violations.map_or_else(String::new, |v| v.to_string()),
    ];
    if timings {
        out.push(cell(row.wall_time_s));
    }
    out
}

fn to_csv(header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Report rows as CSV. The baseline appears only through `change_pct`. A
/// wall-time column is added only when some row carries one.
pub fn render_csv(report: &Report) -> String {
    let rows: Vec<&ReportRow> = report.rows.iter().collect();
    let timings = rows.iter().any(|r| r.wall_time_s.is_some());
    let mut header = COLUMNS.to_vec();
    if timings {
        header.push("wall_time_s");
    }
    to_csv(&header, rows.into_iter().map(|r| record(r, timings)))
}

/// Two-column plot data: the row level against deprivation cost.
pub fn render_plot_csv(report: &Report) -> String {
    to_csv(
        &[report.x_label.as_str(), "p3"],
        report
            .rows
            .iter()
            .filter_map(|r| r.p3.map(|p3| vec![r.level.to_string(), p3.to_string()])),
    )
}

/// Companion plot-data path: `<stem>.plot.csv` next to `path`.
pub fn plot_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.plot.csv"))
}

/// Writes the report and its plot-data companion. Returns both paths.
pub fn emit_report(
    report: &Report,
    format: ReportFormat,
    path: &Path,
) -> io::Result<(PathBuf, PathBuf)> {
    let body = match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
            s.push('\n');
            s
        }
    };
    fs::write(path, body)?;
    let plot = plot_path(path);
    fs::write(&plot, render_plot_csv(report))?;
    Ok((path.to_path_buf(), plot))
}
