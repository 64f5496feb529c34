//! Corpus report rendering.
//!
//! Text and markdown emit a metrics table with one row per aggregation mode
//! (and per domain), WER as a percentage with two decimals and the other
//! scores as two-decimal ratios. JSON emits the full structure including
//! per-video rows and round-trips losslessly.

use super::{CorpusReport, MetricSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Markdown,
    Json,
}

/// Render a corpus report. Output is deterministic for a given report.
pub fn render_report(report: &CorpusReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)
                .expect("corpus report serialization cannot fail");
            out.push(b'\n');
            out
        }
        ReportFormat::Text => render_table(report, false).into_bytes(),
        ReportFormat::Markdown => render_table(report, true).into_bytes(),
    }
}

fn metric_cells(summary: &MetricSummary) -> [String; 5] {
    [
        format!("{:.2}", summary.wer * 100.0),
        format!("{:.2}", summary.bleu),
        format!("{:.2}", summary.rouge1),
        format!("{:.2}", summary.rouge2),
        format!("{:.2}", summary.rouge_l),
    ]
}

fn render_table(report: &CorpusReport, markdown: bool) -> String {
    let header = [
        "Metric".to_string(),
        "WER".to_string(),
        "BLEU".to_string(),
        "ROUGE-1".to_string(),
        "ROUGE-2".to_string(),
        "ROUGE-L".to_string(),
    ];
    let micro_summary = MetricSummary {
        wer: report.micro.wer,
        bleu: report.micro.bleu,
        rouge1: report.micro.rouge1,
        rouge2: report.micro.rouge2,
        rouge_l: report.micro.rouge_l,
    };
    let mut rows = vec![header];
    let mut push_row = |label: String, summary: &MetricSummary| {
        let cells = metric_cells(summary);
        let mut row = vec![label];
        row.extend(cells);
        rows.push(row.try_into().expect("six columns"));
    };
    push_row(format!("{} (micro)", report.system_label), &micro_summary);
    push_row(format!("{} (macro)", report.system_label), &report.macro_avg);

    let mut out = String::new();
    out.push_str(&format!(
        "System: {} ({} videos)\n\n",
        report.system_label,
        report.per_video.len()
    ));
    out.push_str(&format_rows(&rows, markdown));

    if !report.per_domain.is_empty() {
        let mut domain_rows = vec![[
            "Domain".to_string(),
            "WER".to_string(),
            "BLEU".to_string(),
            "ROUGE-1".to_string(),
            "ROUGE-2".to_string(),
            "ROUGE-L".to_string(),
        ]];
        for (domain, summary) in &report.per_domain {
            let cells = metric_cells(summary);
            let mut row = vec![domain.clone()];
            row.extend(cells);
            domain_rows.push(row.try_into().expect("six columns"));
        }
        out.push_str("\nPer-domain (macro):\n\n");
        out.push_str(&format_rows(&domain_rows, markdown));
    }

    if let Some(stats) = &report.constraints {
        out.push_str(&format!(
            "\nConstraint flags: {} sequence violation(s), {} sync risk(s) across {} correction(s)\n",
            stats.sequence_violations,
            stats.sync_risks,
            report.per_video.len()
        ));
    }
    out
}

fn format_rows(rows: &[[String; 6]], markdown: bool) -> String {
    let mut widths = [0usize; 6];
    for row in rows {
        for (width, cell) in widths.iter_mut().zip(row) {
            *width = (*width).max(cell.len());
        }
    }
    let mut out = String::new();
    for (row_idx, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(widths)
            .map(|(cell, width)| format!("{cell:<width$}"))
            .collect();
        if markdown {
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
            if row_idx == 0 {
                let dashes: Vec<String> =
                    widths.iter().map(|width| "-".repeat(*width)).collect();
                out.push_str(&format!("| {} |\n", dashes.join(" | ")));
            }
        } else {
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{ConstraintStats, CorpusReport, VideoScore};
    use super::*;
    use crate::metrics::{evaluate_pair, AlignmentCounts, MetricReport};
    use std::collections::BTreeMap;

    fn sample_report() -> CorpusReport {
        let metrics = MetricReport {
            wer: 0.0975,
            bleu: 0.85,
            rouge1: 0.98,
            rouge2: 0.97,
            rouge_l: 0.98,
            counts: AlignmentCounts {
                substitutions: 3,
                deletions: 1,
                insertions: 0,
                matches: 37,
                ref_len: 41,
            },
        };
        CorpusReport {
            system_label: "demo".to_string(),
            per_video: vec![VideoScore {
                video_id: 1,
                domain: "News".to_string(),
                metrics: metrics.clone(),
            }],
            micro: metrics,
            macro_avg: MetricSummary {
                wer: 0.0975,
                bleu: 0.85,
                rouge1: 0.98,
                rouge2: 0.97,
                rouge_l: 0.98,
            },
            per_domain: BTreeMap::new(),
            constraints: None,
        }
    }

    #[test]
    fn wer_renders_as_percent_with_two_decimals() {
        let text = String::from_utf8(render_report(&sample_report(), ReportFormat::Text)).unwrap();
        assert!(text.contains("9.75"), "{text}");
        assert!(text.contains("0.85"), "{text}");
    }

    #[test]
    fn empty_per_domain_section_is_omitted() {
        let text = String::from_utf8(render_report(&sample_report(), ReportFormat::Text)).unwrap();
        assert!(!text.contains("Per-domain"), "{text}");

        let mut with_domain = sample_report();
        with_domain.per_domain.insert(
            "News".to_string(),
            MetricSummary {
                wer: 0.1,
                bleu: 0.9,
                rouge1: 0.9,
                rouge2: 0.9,
                rouge_l: 0.9,
            },
        );
        let text =
            String::from_utf8(render_report(&with_domain, ReportFormat::Text)).unwrap();
        assert!(text.contains("Per-domain"), "{text}");
        assert!(text.contains("News"), "{text}");
    }

    #[test]
    fn markdown_has_header_separator() {
        let md =
            String::from_utf8(render_report(&sample_report(), ReportFormat::Markdown)).unwrap();
        assert!(md.contains("| Metric"), "{md}");
        assert!(md.lines().any(|line| line.starts_with("| -")), "{md}");
    }

    #[test]
    fn json_round_trips() {
        let mut report = sample_report();
        report.constraints = Some(ConstraintStats {
            sequence_violations: 2,
            sync_risks: 1,
        });
        report.per_video[0].metrics = evaluate_pair("a b c", "a x c").unwrap();
        let rendered = render_report(&report, ReportFormat::Json);
        let parsed: CorpusReport = serde_json::from_slice(&rendered).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn constraint_stats_render_when_present() {
        let mut report = sample_report();
        report.constraints = Some(ConstraintStats {
            sequence_violations: 2,
            sync_risks: 1,
        });
        let text = String::from_utf8(render_report(&report, ReportFormat::Text)).unwrap();
        assert!(text.contains("2 sequence violation(s)"), "{text}");
    }
}
