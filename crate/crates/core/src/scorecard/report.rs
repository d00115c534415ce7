use std::fmt::Write as _;
use std::str::FromStr;

use crate::data::xml::fmt_num;
use crate::data::{BenchmarkConfig, LIFT_HEIGHT};

use super::{LayoutScore, ObjectScoreRow};

/// Published and recomputed composites closer than this are not flagged.
pub const DISCREPANCY_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Markdown,
    Html,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "markdown" | "md" => Ok(Self::Markdown),
            "html" => Ok(Self::Html),
            other => Err(format!("unknown report format '{other}'")),
        }
    }
}

/// One table cell: text plus whether it is highlighted.
struct Cell {
    text: String,
    emphasized: bool,
}

fn value(v: f64, emphasized: bool) -> Cell {
    Cell {
        text: format!("{v:.2}"),
        emphasized,
    }
}

fn na() -> Cell {
    Cell {
        text: "N/A".into(),
        emphasized: false,
    }
}

fn optional(v: Option<f64>) -> Cell {
    v.map_or_else(na, |v| value(v, false))
}

fn header(score: &LayoutScore) -> Vec<&'static str> {
    let mut h = vec!["Object", "S0", "S1", "S2", "S3", "S4", "S5"];
    if score.modality == crate::data::Modality::Clutter {
        h.push("S6");
    }
    h.push("Final");
    h
}

fn cells(score: &LayoutScore, row: &ObjectScoreRow) -> Vec<Cell> {
    let mut c = vec![
        Cell {
            text: row.name.clone(),
            emphasized: false,
        },
        value(row.s0, row.flags.low_reach),
        match row.s1 {
            Some(s1) => value(s1, row.flags.low_calib),
            None => Cell {
                text: "-".into(),
                emphasized: false,
            },
        },
        value(if row.s2 { 1.0 } else { 0.0 }, row.flags.ungraspable),
        optional(row.s3),
        optional(row.s4),
        optional(row.s5),
    ];
    if score.modality == crate::data::Modality::Clutter {
        c.push(optional(row.s6));
    }
    c.push(optional(row.final_score));
    c
}

fn settings(config: &BenchmarkConfig, score: &LayoutScore) -> Vec<(&'static str, String)> {
    vec![
        ("Layout", score.layout_id.to_string()),
        ("Robot", config.robot.clone()),
        ("End effector", config.end_effector.clone()),
        ("Modality", score.modality.to_string()),
        ("Uses vision", config.uses_vision.to_string()),
        (
            "Reach thresholds",
            format!("{} m, {} rad", fmt_num(config.reach.position), fmt_num(config.reach.angle)),
        ),
        (
            "Calibration thresholds",
            format!(
                "{} m, {} rad",
                fmt_num(config.calibration.position),
                fmt_num(config.calibration.angle)
            ),
        ),
        ("Trials", config.trials.to_string()),
        (
            "Friction",
            format!("mu {}, {} cone edges", fmt_num(config.mu), config.cone_edges),
        ),
        (
            "Perturbation",
            format!("{} m, {} rad", fmt_num(config.perturb_dp), fmt_num(config.perturb_da)),
        ),
        ("Lift", format!("{} m", fmt_num(LIFT_HEIGHT))),
        (
            "OWS sampling",
            format!("{} samples, seed {}", config.ows_samples, config.seed),
        ),
        (
            "Eligibility",
            format!(
                "{} {}",
                if config.eligibility.strict { ">" } else { ">=" },
                fmt_num(config.eligibility.threshold)
            ),
        ),
    ]
}

fn summary(score: &LayoutScore) -> String {
    match score.final_score {
        Some(f) => format!(
            "{f:.2} ({} of {} objects eligible)",
            score.m_eligible,
            score.rows.len()
        ),
        None => format!("N/A (0 of {} objects eligible)", score.rows.len()),
    }
}

fn note(score: &LayoutScore) -> Option<String> {
    score.discrepancy(DISCREPANCY_TOLERANCE).map(|(f, p)| {
        format!(
            "recomputed composite {f:.3} differs from the published value {} by {:.3}",
            fmt_num(p),
            (f - p).abs()
        )
    })
}

const LEGEND: &str = "highlighted values are below the eligibility threshold or not graspable";

/// Renders the scorecard. Output depends only on the inputs.
pub fn emit_report(score: &LayoutScore, config: &BenchmarkConfig, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => text(score, config),
        ReportFormat::Markdown => markdown(score, config),
        ReportFormat::Html => html(score, config),
    }
}

fn text(score: &LayoutScore, config: &BenchmarkConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Benchmark scorecard");
    let settings = settings(config, score);
    let key_width = settings.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in &settings {
        let _ = writeln!(out, "  {k:<key_width$}  {v}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Composite score: {}", summary(score));
    if let Some(n) = note(score) {
        let _ = writeln!(out, "Note: {n}");
    }
    let _ = writeln!(out);

    let head = header(score);
    let rows: Vec<Vec<String>> = score
        .rows
        .iter()
        .map(|r| {
            cells(score, r)
                .into_iter()
                .map(|c| if c.emphasized { format!("{}*", c.text) } else { c.text })
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..head.len())
        .map(|i| rows.iter().map(|r| r[i].len()).chain([head[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |cols: Vec<&str>| -> String {
        let mut s = String::new();
        for (i, c) in cols.iter().enumerate() {
            let w = widths[i];
            if i == 0 {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "  {c:>w$}");
            }
        }
        s.trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(head.clone()));
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    for r in &rows {
        let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "* {LEGEND}");
    out
}

fn markdown(score: &LayoutScore, config: &BenchmarkConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Benchmark scorecard\n");
    let _ = writeln!(out, "| Setting | Value |");
    let _ = writeln!(out, "|---|---|");
    for (k, v) in settings(config, score) {
        let _ = writeln!(out, "| {k} | {v} |");
    }
    let _ = writeln!(out, "\n**Composite score:** {}\n", summary(score));
    if let Some(n) = note(score) {
        let _ = writeln!(out, "> Note: {n}\n");
    }
    let head = header(score);
    let _ = writeln!(out, "| {} |", head.join(" | "));
    let align: Vec<&str> = (0..head.len()).map(|i| if i == 0 { "---" } else { "---:" }).collect();
    let _ = writeln!(out, "|{}|", align.join("|"));
    for r in &score.rows {
        let c: Vec<String> = cells(score, r)
            .into_iter()
            .map(|c| if c.emphasized { format!("**{}**", c.text) } else { c.text })
            .collect();
        let _ = writeln!(out, "| {} |", c.join(" | "));
    }
    let _ = writeln!(out, "\nBold: {LEGEND}.");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn html(score: &LayoutScore, config: &BenchmarkConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<!DOCTYPE html>");
    let _ = writeln!(out, "<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Benchmark scorecard</title>");
    let _ = writeln!(
        out,
        "<style>table {{ border-collapse: collapse; }} td.num {{ text-align: right; }}</style>"
    );
    let _ = writeln!(out, "</head>\n<body>\n<h1>Benchmark scorecard</h1>");
    let _ = writeln!(out, "<table class=\"settings\">");
    for (k, v) in settings(config, score) {
        let _ = writeln!(out, "<tr><th>{}</th><td>{}</td></tr>", escape(k), escape(&v));
    }
    let _ = writeln!(out, "</table>");
    let _ = writeln!(out, "<p><strong>Composite score:</strong> {}</p>", summary(score));
    if let Some(n) = note(score) {
        let _ = writeln!(out, "<p class=\"note\">Note: {}</p>", escape(&n));
    }
    let _ = writeln!(out, "<table class=\"scores\">");
    let head = header(score);
    let _ = writeln!(
        out,
        "<tr>{}</tr>",
        head.iter().map(|h| format!("<th>{h}</th>")).collect::<String>()
    );
    for r in &score.rows {
        let mut line = String::from("<tr>");
        for (i, c) in cells(score, r).into_iter().enumerate() {
            let class = if i == 0 { "" } else { " class=\"num\"" };
            let text = escape(&c.text);
            let text = if c.emphasized { format!("<strong>{text}</strong>") } else { text };
            let _ = write!(line, "<td{class}>{text}</td>");
        }
        line.push_str("</tr>");
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "</table>");
    let _ = writeln!(out, "<p>Bold: {LEGEND}.</p>");
    let _ = writeln!(out, "</body>\n</html>");
    out
}
