use std::fmt::Write as _;
use std::path::Path;

use super::suite::BenchReport;
use crate::plan::EngineMode;

pub const CSV_HEADER: &str = "query_id,engine,result_count,wall_ms_median,plan_self_joins,runtime_same_table_probes";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    /// Picks the format from a file extension (`.md` is markdown, anything else csv).
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("md") | Some("markdown") => ReportFormat::Markdown,
            _ => ReportFormat::Csv,
        }
    }
}

fn ms(d: std::time::Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1000.0)
}

pub fn render_csv(report: &BenchReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.query_id,
            r.engine,
            r.result_count,
            ms(r.wall_median),
            r.plan_self_joins,
            r.runtime_same_table_probes
        );
    }
    out
}

fn engines_of(report: &BenchReport) -> Vec<EngineMode> {
    let mut out: Vec<EngineMode> = Vec::new();
    for r in &report.rows {
        if !out.contains(&r.engine) {
            out.push(r.engine);
        }
    }
    out
}

/// Query-by-engine grid: one row per query, a result-count column, then a
/// time group and a self-join group with one column per engine.
pub fn render_markdown(report: &BenchReport) -> String {
    let engines = engines_of(report);
    let mut out = String::new();
    let m = &report.meta;
    let _ = writeln!(out, "# Benchmark report\n");
    let _ = writeln!(out, "- dataset: `{}`", m.dataset.display());
    let _ = writeln!(out, "- triples: {}", m.triple_count);
    if let Some(seed) = m.seed {
        let _ = writeln!(out, "- seed: {seed}");
    }
    let _ = writeln!(out, "- repetitions: {} (median wall time)\n", m.repetitions);

    let mut header = vec!["Query".to_string(), "Results".to_string()];
    header.extend(engines.iter().map(|e| format!("Time ms: {e}")));
    header.extend(engines.iter().map(|e| format!("Self-joins: {e}")));
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for q in report.query_ids() {
        let cells: Vec<_> = engines.iter().map(|&e| report.row(q, e)).collect();
        let counts: Vec<usize> = cells.iter().flatten().map(|r| r.result_count).collect();
        let results = match counts.first() {
            Some(&c) if counts.iter().all(|&x| x == c) => c.to_string(),
            Some(_) => format!(
                "mismatch ({})",
                counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("/")
            ),
            None => "-".to_string(),
        };
        let mut line = vec![q.to_string(), results];
        line.extend(cells.iter().map(|c| c.map_or("-".to_string(), |r| ms(r.wall_median))));
        line.extend(cells.iter().map(|c| c.map_or("-".to_string(), |r| r.plan_self_joins.to_string())));
        let _ = writeln!(out, "| {} |", line.join(" | "));
    }
    if !report.failures.is_empty() {
        let _ = writeln!(out, "\n## Failures\n");
        for f in &report.failures {
            let engine = f.engine.map_or("-".to_string(), |e| e.to_string());
            let _ = writeln!(out, "- {} [{}]: {}", f.query_id, engine, f.message);
        }
    }
    out
}

pub fn render(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

pub fn emit_report(report: &BenchReport, format: ReportFormat, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render(report, format))
}
