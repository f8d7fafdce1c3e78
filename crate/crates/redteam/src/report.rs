//! Report files: one JSON summary plus a CSV of per-query rows. Output is
//! byte-stable for a fixed report so digest comparison works across runs.

use std::io::Write;
use std::path::Path;

use ragward_core::TraceTag;

use crate::episode::{EpisodeError, EpisodeReport, QueryRow};

fn tag_str(tag: TraceTag) -> &'static str {
    match tag {
        TraceTag::Benign => "BENIGN",
        TraceTag::PoisonTrigger => "POISON_TRIGGER",
        TraceTag::MiaProbe => "MIA_PROBE",
    }
}

fn opt_num<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, T::to_string)
}

fn csv_row(row: &QueryRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        row.query_id,
        tag_str(row.tag),
        row.policy,
        row.defenses_fired.join(";"),
        opt_num(&row.asr_hit),
        opt_num(&row.mba_hit),
        opt_num(&row.contextual_recall),
        opt_num(&row.contextual_relevancy),
        opt_num(&row.answer_relevancy),
        opt_num(&row.faithfulness),
    )
}

pub const CSV_HEADER: &str = "query_id,tag,policy,defenses_fired,asr_hit,mba_hit,contextual_recall,contextual_relevancy,answer_relevancy,faithfulness\n";

/// Write the JSON summary to `json_path` and, when given, the per-query
/// CSV to `csv_path`.
pub fn emit_report(
    report: &EpisodeReport,
    json_path: &Path,
    csv_path: Option<&Path>,
) -> Result<(), EpisodeError> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| EpisodeError::Report(e.to_string()))?;
    json.push('\n');
    std::fs::File::create(json_path)
        .and_then(|mut f| f.write_all(json.as_bytes()))
        .map_err(|e| EpisodeError::Trace(crate::trace::TraceError::Io(e)))?;

    if let Some(csv_path) = csv_path {
        let mut csv = String::from(CSV_HEADER);
        for row in &report.rows {
            csv.push_str(&csv_row(row));
        }
        std::fs::File::create(csv_path)
            .and_then(|mut f| f.write_all(csv.as_bytes()))
            .map_err(|e| EpisodeError::Trace(crate::trace::TraceError::Io(e)))?;
    }
    Ok(())
}

pub fn load_report(path: &Path) -> Result<EpisodeReport, EpisodeError> {
    let data = std::fs::read_to_string(path)
        .map_err(|e| EpisodeError::Trace(crate::trace::TraceError::Io(e)))?;
    serde_json::from_str(&data).map_err(|e| EpisodeError::Report(e.to_string()))
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.4}"))
}

/// Side-by-side metric table for several reports, with deltas against the
/// first.
pub fn render_comparison(reports: &[EpisodeReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        "policy", "asr", "ret_hit", "leak_mem", "leak_non", "recall", "faith"
    ));
    for report in reports {
        out.push_str(&format!(
            "{:<28} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            report.policy,
            fmt_metric(report.asr),
            fmt_metric(report.retrieval_hit_rate),
            fmt_metric(report.leakage_member),
            fmt_metric(report.leakage_nonmember),
            fmt_metric(report.utility.contextual_recall),
            fmt_metric(report.utility.faithfulness),
        ));
    }
    if let Some(first) = reports.first() {
        for report in &reports[1..] {
            let delta = |a: Option<f64>, b: Option<f64>| match (a, b) {
                (Some(a), Some(b)) => format!("{:+.4}", b - a),
                _ => "N/A".into(),
            };
            out.push_str(&format!(
                "{:<28} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
                format!("delta vs {}", first.policy),
                delta(first.asr, report.asr),
                delta(first.retrieval_hit_rate, report.retrieval_hit_rate),
                delta(first.leakage_member, report.leakage_member),
                delta(first.leakage_nonmember, report.leakage_nonmember),
                delta(first.utility.contextual_recall, report.utility.contextual_recall),
                delta(first.utility.faithfulness, report.utility.faithfulness),
            ));
        }
    }
    out
}
