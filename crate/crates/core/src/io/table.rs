//! Aligned plain-text tables for console output.

use std::fmt::Write;

use crate::verify::{CaseStatus, VerificationReport};

/// Renders rows under a header. Columns whose cells are all numeric are
/// right-aligned.
pub fn format_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let cols = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let numeric: Vec<bool> = (0..cols)
        .map(|c| {
            !rows.is_empty()
                && rows
                    .iter()
                    .all(|r| r.get(c).is_some_and(|v| v == "-" || v.parse::<f64>().is_ok()))
        })
        .collect();
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (c, cell) in cells.iter().enumerate() {
            if c > 0 {
                s.push_str("  ");
            }
            let pad = widths[c].saturating_sub(cell.chars().count());
            if numeric[c] {
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            } else {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(headers.to_vec());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(rule.iter().map(String::as_str).collect());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

pub fn render_report_table(report: &VerificationReport) -> String {
    let rule_ids: Vec<&str> = report.aggregates.rules.iter().map(|r| r.rule.as_str()).collect();
    let mut headers = vec!["#", "scenario", "trajectory", "status"];
    headers.extend(&rule_ids);
    headers.extend(["violated", "criticality"]);

    let rows: Vec<Vec<String>> = report
        .cases
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut row = vec![
                i.to_string(),
                c.scenario_id.clone(),
                c.trajectory_id.clone(),
                match c.status {
                    CaseStatus::Pass => "pass",
                    CaseStatus::Fail => "FAIL",
                    CaseStatus::Error => "error",
                }
                .to_owned(),
            ];
            row.extend(rule_ids.iter().map(|id| {
                c.scores
                    .as_ref()
                    .and_then(|s| s.get(*id))
                    .map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
            }));
            let violated: Vec<&str> = c.violated.iter().map(|r| r.as_str()).collect();
            row.push(if violated.is_empty() { "-".into() } else { violated.join(",") });
            row.push(c.criticality.as_ref().map_or_else(
                || "-".to_owned(),
                |t| {
                    let counts: Vec<String> = t.counts.iter().map(u32::to_string).collect();
                    format!("{} ({})", counts.join("/"), t.scalar)
                },
            ));
            row
        })
        .collect();

    let mut out = format!("report for rulebook `{}`\n\n", report.rulebook_id);
    out.push_str(&format_table(&headers, &rows));

    let errors: Vec<(usize, &str)> = report
        .cases
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.error.as_deref().map(|e| (i, e)))
        .collect();
    if !errors.is_empty() {
        out.push_str("\nerrors\n");
        for (i, e) in errors {
            let _ = writeln!(out, "  {i}: {e}");
        }
    }

    let rule_rows: Vec<Vec<String>> = report
        .aggregates
        .rules
        .iter()
        .map(|r| {
            vec![
                r.rule.to_string(),
                r.violations.to_string(),
                r.evaluated.to_string(),
                format!("{:.3}", r.frequency),
                format!("{:.4}", r.mean_score),
            ]
        })
        .collect();
    out.push('\n');
    out.push_str(&format_table(
        &["rule", "violations", "evaluated", "frequency", "mean score"],
        &rule_rows,
    ));
    let a = &report.aggregates;
    let _ = writeln!(
        out,
        "\ncases {}, passed {}, failed {}, errored {}",
        a.cases, a.passed, a.failed, a.errored
    );
    if !a.critical.is_empty() {
        let list: Vec<String> = a.critical.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "most critical first: {}", list.join(", "));
    }
    out
}
