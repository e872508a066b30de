use dismetrics::reproduce::{CaseRow, ParametricScores};
use dismetrics::MetricReport;

fn score_cell(r: &MetricReport) -> String {
    r.score.map_or(String::new(), |s| s.to_string())
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn reports_csv(reports: &[MetricReport]) -> String {
    let mut out = String::from("metric,score,skipped,skip_reason\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.metric,
            score_cell(r),
            r.skipped,
            csv_escape(r.skip_reason.as_deref().unwrap_or(""))
        ));
    }
    out
}

pub fn reports_table(reports: &[MetricReport]) -> String {
    let mut out = format!("{:<10} {:>10}  {}\n", "metric", "score", "note");
    for r in reports {
        let score = r.score.map_or("-".to_string(), |s| format!("{s:.4}"));
        let note = r.skip_reason.as_deref().unwrap_or("");
        out.push_str(&format!("{:<10} {:>10}  {}\n", r.metric.name(), score, note));
    }
    out
}

pub fn case_rows_csv(rows: &[CaseRow]) -> String {
    let mut out = String::from("case,quantity,seed,expected,tolerance,observed,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.case,
            csv_escape(&r.quantity),
            r.seed.map_or(String::new(), |s| s.to_string()),
            r.expected,
            r.tolerance,
            r.observed,
            r.pass
        ));
    }
    out
}

pub fn sweep_csv(rows: &[ParametricScores]) -> String {
    let mut out = String::from("eps,eps1,three_charm,mig,dci,dci_not_computable\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.eps, r.eps1, r.three_charm, r.mig, r.dci, r.dci_not_computable
        ));
    }
    out
}
