//! Writers for the CSV, Newick and JSON artifacts.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde_json::{json, Value};

use crate::dissim::DissimilarityMatrix;
use crate::error::{invalid, Error, Result};
use crate::graph::CenterReport;
use crate::hclust::{parse_newick, to_newick, Dendrogram};
use crate::ingest::ReturnPanel;
use crate::monitor::{ControlChartReport, DistanceSeries};
use crate::numfmt::{fmt_f64, json_f64};

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn date(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

pub fn returns_csv(panel: &ReturnPanel) -> String {
    let mut s = String::from("Date");
    for t in panel.tickers() {
        s.push(',');
        s.push_str(&csv_field(t));
    }
    s.push('\n');
    for (r, d) in panel.dates().iter().enumerate() {
        s.push_str(&date(*d));
        for v in panel.returns().row(r).iter() {
            s.push(',');
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

/// Square matrix with a header row and a header column of tickers.
pub fn matrix_csv(m: &DissimilarityMatrix) -> String {
    let mut s = String::from(m.kind.label());
    for l in &m.labels {
        s.push(',');
        s.push_str(&csv_field(l));
    }
    s.push('\n');
    for (i, l) in m.labels.iter().enumerate() {
        s.push_str(&csv_field(l));
        for v in m.values.row(i).iter() {
            s.push(',');
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn matrix_json(m: &DissimilarityMatrix) -> Value {
    json!({
        "kind": m.kind.label(),
        "window_index": m.window_index,
        "window_end_date": date(m.window_end_date),
        "labels": m.labels,
        "values": m.values.row_iter()
            .map(|r| r.iter().map(|v| json_f64(*v)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

/// `window_end_date,center_tickers` with tie members joined by `;`.
pub fn centers_csv(report: &CenterReport) -> String {
    let mut s = String::from("window_end_date,center_tickers\n");
    for (d, set) in &report.per_window {
        let joined = set.iter().cloned().collect::<Vec<_>>().join(";");
        let _ = writeln!(s, "{},{}", date(*d), csv_field(&joined));
    }
    s
}

pub fn center_frequency_csv(report: &CenterReport) -> String {
    let mut s = String::from("ticker,count\n");
    for (t, c) in &report.aggregate {
        let _ = writeln!(s, "{},{c}", csv_field(t));
    }
    s
}

/// One tree per line, chronological, each prefixed by a `[YYYY-MM-DD]`
/// Newick comment carrying the window end date.
pub fn multi_newick(trees: &[(NaiveDate, Dendrogram)]) -> String {
    let mut s = String::new();
    for (d, t) in trees {
        let _ = writeln!(s, "[{}]{}", date(*d), to_newick(t));
    }
    s
}

pub fn read_multi_newick(text: &str) -> Result<Vec<(NaiveDate, Dendrogram)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rest = line
            .strip_prefix('[')
            .and_then(|r| r.split_once(']'))
            .ok_or_else(|| invalid(format!("tree line {}: missing [date] prefix", i + 1)))?;
        let d = NaiveDate::parse_from_str(rest.0.trim(), "%Y-%m-%d")
            .map_err(|_| invalid(format!("tree line {}: bad date `{}`", i + 1, rest.0)))?;
        out.push((d, parse_newick(rest.1)?));
    }
    Ok(out)
}

pub fn distance_csv(series: &DistanceSeries) -> String {
    let mut s = String::from("date,distance\n");
    for (d, v) in series.timestamps.iter().zip(&series.values) {
        let _ = writeln!(s, "{},{}", date(*d), fmt_f64(*v));
    }
    s
}

pub fn chart_csv(series: &DistanceSeries, chart: &ControlChartReport) -> String {
    let mut s = String::from("date,value,mean,threshold,alarm\n");
    let mean = fmt_f64(chart.mean);
    let threshold = fmt_f64(chart.threshold);
    for (d, v) in series.timestamps.iter().zip(&series.values) {
        let _ = writeln!(
            s,
            "{},{},{mean},{threshold},{}",
            date(*d),
            fmt_f64(*v),
            u8::from(chart.is_alarm(*v))
        );
    }
    s
}

pub fn chart_json(chart: &ControlChartReport) -> Value {
    json!({
        "label": chart.label,
        "mean": json_f64(chart.mean),
        "sd": json_f64(chart.sd),
        "k": json_f64(chart.k),
        "mode": chart.mode.to_string(),
        "threshold": json_f64(chart.threshold),
        "alarm_count": chart.alarm_count,
        "alarms": chart.alarms.iter()
            .map(|(d, v)| json!({"date": date(*d), "value": json_f64(*v)}))
            .collect::<Vec<_>>(),
    })
}

pub fn to_json_text(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_newick_round_trip() {
        let t = parse_newick("((a:1,b:1):1,c:2);").unwrap();
        let d = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
        let text = multi_newick(&[(d, t.clone()), (d + chrono::Days::new(1), t.clone())]);
        assert!(text.starts_with("[2021-03-01]((a:1,b:1):1,c:2);\n"));
        let back = read_multi_newick(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].1.labeled_clusters(), t.labeled_clusters());
        assert!(read_multi_newick("((a:1,b:1):1,c:2);").is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("A,B"), "\"A,B\"");
        assert_eq!(csv_field("AB"), "AB");
    }
}
