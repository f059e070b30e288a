use std::collections::BTreeMap;
use std::fmt::Write as _;

use gaitnet::data::Task;
use gaitnet::train::{EvalReport, Regime};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct SummaryRow {
    pub placement: String,
    pub protocol: String,
    pub regime: Regime,
    pub head_mode: String,
    pub augment: Option<f64>,
    pub accuracy: f64,
    pub f1: f64,
    /// Highest accuracy among rows of the same task and regime.
    pub best: bool,
    pub source: String,
}

#[derive(Debug, Serialize)]
pub struct SummaryGroup {
    pub task: Task,
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub groups: Vec<SummaryGroup>,
}

/// Groups reports by task; rows keep the order the reports were given in.
pub fn summarize(reports: &[(String, EvalReport)]) -> Summary {
    let mut by_task: BTreeMap<Task, Vec<&(String, EvalReport)>> = BTreeMap::new();
    for entry in reports {
        by_task.entry(entry.1.task).or_default().push(entry);
    }
    let groups = by_task
        .into_iter()
        .map(|(task, entries)| {
            let mut best: BTreeMap<Regime, f64> = BTreeMap::new();
            for (_, r) in &entries {
                let b = best.entry(r.regime).or_insert(f64::MIN);
                *b = b.max(r.accuracy);
            }
            let rows = entries
                .into_iter()
                .map(|(source, r)| SummaryRow {
                    placement: r.placement.to_string(),
                    protocol: r.protocol.to_string(),
                    regime: r.regime,
                    head_mode: match r.head_mode {
                        gaitnet::model::HeadMode::Single => "single".into(),
                        gaitnet::model::HeadMode::TwoHead => "two_head".into(),
                    },
                    augment: r.augment,
                    accuracy: r.accuracy,
                    f1: r.f1,
                    best: r.accuracy == best[&r.regime],
                    source: source.clone(),
                })
                .collect();
            SummaryGroup { task, rows }
        })
        .collect();
    Summary { groups }
}

pub fn render_text(summary: &Summary) -> String {
    let mut out = String::new();
    for (i, group) in summary.groups.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "task: {}", group.task);
        let _ = writeln!(out, "{:<10} {:<9} {:<13} {:<9} {:>8} {:>8}", "placement", "protocol", "regime", "head", "accuracy", "f1");
        for row in &group.rows {
            let head = match (row.head_mode.as_str(), row.augment) {
                ("two_head", Some(_)) => "2h+aug",
                ("two_head", None) => "2h",
                (_, Some(_)) => "1h+aug",
                _ => "1h",
            };
            let line = format!(
                "{:<10} {:<9} {:<13} {:<9} {:>8.4} {:>8.4}  {}",
                row.placement,
                row.protocol,
                row.regime.to_string(),
                head,
                row.accuracy,
                row.f1,
                if row.best { "*" } else { "" }
            );
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
    out.push_str("\n* best accuracy within task and regime\n");
    out
}
