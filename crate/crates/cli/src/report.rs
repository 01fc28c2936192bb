//! Text tables and plot-data CSVs from an [`EvalReport`].
//!
//! CSV headers:
//! - `eval_rows.csv`: `method,t_align,recording,windows,mean_ae_deg`
//! - `ae_vs_talign.csv`: `t_align,method,mean_ae_deg`
//! - `improvement.csv`: `t_align,best_baseline_name,best_ae,nn_ae,improvement_pct`

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::eval::{EvalReport, SCHEMA_VERSION};

pub const ROWS_HEADER: &str = "method,t_align,recording,windows,mean_ae_deg";
pub const AE_HEADER: &str = "t_align,method,mean_ae_deg";
pub const IMPROVEMENT_HEADER: &str = "t_align,best_baseline_name,best_ae,nn_ae,improvement_pct";

pub fn rows_csv(r: &EvalReport) -> String {
    let mut s = format!("{ROWS_HEADER}\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6}",
            row.method, row.t_align, row.recording, row.windows, row.mean_ae_deg
        );
    }
    s
}

pub fn ae_csv(r: &EvalReport) -> String {
    let mut rows: Vec<_> = r.averages.iter().collect();
    rows.sort_by_key(|a| a.t_align);
    let mut s = format!("{AE_HEADER}\n");
    for a in rows {
        let _ = writeln!(s, "{},{},{:.6}", a.t_align, a.method, a.mean_ae_deg);
    }
    s
}

pub fn improvement_csv(r: &EvalReport) -> String {
    let mut s = format!("{IMPROVEMENT_HEADER}\n");
    for i in &r.improvements {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.2}",
            i.t_align, i.best_baseline_name, i.best_ae, i.nn_ae, i.improvement_pct
        );
    }
    s
}

/// Average AE (deg) with methods as rows and alignment times as columns,
/// followed by the improvement table when the report has one.
pub fn text_table(r: &EvalReport) -> String {
    let mut methods: Vec<&str> = Vec::new();
    let mut times: Vec<u32> = Vec::new();
    for a in &r.averages {
        if !methods.contains(&a.method.as_str()) {
            methods.push(&a.method);
        }
        if !times.contains(&a.t_align) {
            times.push(a.t_align);
        }
    }
    times.sort_unstable();
    let name_w = methods.iter().map(|m| m.len()).max().unwrap_or(6).max(6);
    let mut s = String::from("Average AE (deg)\n");
    let _ = write!(s, "{:<name_w$}", "method");
    for t in &times {
        let _ = write!(s, "  {:>8}", format!("{t} s"));
    }
    s.push('\n');
    for m in &methods {
        let _ = write!(s, "{m:<name_w$}");
        for t in &times {
            match r.averages.iter().find(|a| a.method == *m && a.t_align == *t) {
                Some(a) => {
                    let _ = write!(s, "  {:>8.3}", a.mean_ae_deg);
                }
                None => {
                    let _ = write!(s, "  {:>8}", "-");
                }
            }
        }
        s.push('\n');
    }
    if !r.improvements.is_empty() {
        s.push_str("\nImprovement over best baseline\n");
        let _ = writeln!(
            s,
            "{:>7}  {:<8}  {:>8}  {:>8}  {:>8}",
            "t_align", "baseline", "best", "net", "gain %"
        );
        for i in &r.improvements {
            let _ = writeln!(
                s,
                "{:>7}  {:<8}  {:>8.3}  {:>8.3}  {:>8.2}",
                i.t_align, i.best_baseline_name, i.best_ae, i.nn_ae, i.improvement_pct
            );
        }
    }
    s
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let report: EvalReport = serde_json::from_slice(&bytes).map_err(|e| CliError::Artifact {
        path: path.to_path_buf(),
        msg: format!("not an evaluation report: {e}"),
    })?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(CliError::Artifact {
            path: path.to_path_buf(),
            msg: format!("unsupported schema version '{}'", report.schema_version),
        });
    }
    Ok(report)
}

pub fn report_json(r: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}
