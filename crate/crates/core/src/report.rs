//! Rendering of [`InvariantReport`] as a table, JSON lines or CSV.
//!
//! JSON lines: one `{"kind":"subset",...}` object per swept subset followed
//! by a single `{"kind":"summary",...}` object. Subsets are 1-based lists.

use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{InvariantReport, SubsetRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    JsonLines,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Format::Table),
            "json-lines" | "jsonl" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Parse(format!("unknown format {s:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Table => "table",
            Format::JsonLines => "json-lines",
            Format::Csv => "csv",
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Subset(SubsetRecord),
    Summary {
        dims: Vec<usize>,
        purity: f64,
        sum_residual: Option<f64>,
        entangled: bool,
        extras: BTreeMap<String, f64>,
    },
}

pub fn render(report: &InvariantReport, format: Format) -> String {
    match format {
        Format::Table => to_table(report),
        Format::JsonLines => to_json_lines(report),
        Format::Csv => to_csv(report),
    }
}

pub fn to_table(report: &InvariantReport) -> String {
    let mut out = String::new();
    let width = report
        .records
        .iter()
        .map(|r| r.subset.to_string().len())
        .max()
        .unwrap_or(0)
        .max("subset".len());
    writeln!(out, "dims {:?}", report.dims).unwrap();
    writeln!(
        out,
        "{:<width$}  {:>22}  {:>10}  exceeded",
        "subset", "L_S", "bound"
    )
    .unwrap();
    for r in &report.records {
        writeln!(
            out,
            "{:<width$}  {:>22.15}  {:>10}  {}",
            r.subset.to_string(),
            r.strength,
            r.bound,
            if r.exceeded { "yes" } else { "no" }
        )
        .unwrap();
    }
    writeln!(out, "purity {:.15}", report.purity).unwrap();
    match report.sum_residual {
        Some(res) => writeln!(out, "sum rule residual {res:.3e}").unwrap(),
        None => writeln!(out, "sum rule residual n/a (partial sweep)").unwrap(),
    }
    for (k, v) in &report.extras {
        writeln!(out, "{k} {v}").unwrap();
    }
    let verdict = if report.entangled() {
        "entangled"
    } else {
        "separability not excluded"
    };
    writeln!(out, "verdict {verdict}").unwrap();
    out
}

pub fn to_json_lines(report: &InvariantReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        out.push_str(&serde_json::to_string(&Line::Subset(*r)).expect("record serializes"));
        out.push('\n');
    }
    let summary = Line::Summary {
        dims: report.dims.clone(),
        purity: report.purity,
        sum_residual: report.sum_residual,
        entangled: report.entangled(),
        extras: report.extras.clone(),
    };
    out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
    out.push('\n');
    out
}

pub fn from_json_lines(text: &str) -> Result<InvariantReport> {
    let mut records = Vec::new();
    let mut summary = None;
    for (k, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let parsed: Line =
            serde_json::from_str(line).map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))?;
        match parsed {
            Line::Subset(r) => records.push(r),
            Line::Summary {
                dims,
                purity,
                sum_residual,
                entangled,
                extras,
            } => {
                if summary.is_some() {
                    return Err(Error::Parse(format!("line {}: second summary", k + 1)));
                }
                summary = Some((dims, purity, sum_residual, entangled, extras));
            }
        }
    }
    let (dims, purity, sum_residual, entangled, extras) =
        summary.ok_or_else(|| Error::Parse("missing summary line".into()))?;
    let report = InvariantReport {
        dims,
        records,
        purity,
        sum_residual,
        extras,
    };
    if report.entangled() != entangled {
        return Err(Error::Parse(
            "summary verdict disagrees with subset records".into(),
        ));
    }
    Ok(report)
}

#[derive(Serialize)]
struct CsvRow {
    subset: String,
    strength: f64,
    bound: f64,
    exceeded: bool,
}

/// Subsets are written as space-separated 1-based labels.
pub fn to_csv(report: &InvariantReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.records {
        let labels: Vec<String> = r
            .subset
            .to_one_based()
            .iter()
            .map(usize::to_string)
            .collect();
        w.serialize(CsvRow {
            subset: labels.join(" "),
            strength: r.strength,
            bound: r.bound,
            exceeded: r.exceeded,
        })
        .expect("csv row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{entanglement_verdict, SweepOptions};
    use crate::state::random_state;
    use crate::PartySet;

    fn sample() -> InvariantReport {
        let rho = random_state(&[2, 2, 3], 1, 42).unwrap();
        let mut r = entanglement_verdict(&rho, &SweepOptions::for_parties(3)).unwrap();
        r.extras.insert("threshold".into(), 0.5);
        r
    }

    #[test]
    fn json_lines_round_trip() {
        let r = sample();
        let text = to_json_lines(&r);
        assert_eq!(text.lines().count(), r.records.len() + 1);
        assert!(text
            .lines()
            .next()
            .unwrap()
            .starts_with(r#"{"kind":"subset","subset":[1]"#));
        assert!(text
            .lines()
            .last()
            .unwrap()
            .starts_with(r#"{"kind":"summary""#));
        assert_eq!(from_json_lines(&text).unwrap(), r);
    }

    #[test]
    fn json_lines_errors() {
        let text = to_json_lines(&sample());
        let no_summary: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(from_json_lines(&no_summary).is_err());
        assert!(from_json_lines("{\"kind\":\"other\"}").is_err());
        let flipped = text.replace("\"entangled\":true", "\"entangled\":false");
        assert!(from_json_lines(&flipped).is_err());
    }

    #[test]
    fn csv_and_table() {
        let r = sample();
        let csv = to_csv(&r);
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.contains("\n1 2 3,"));
        let table = to_table(&r);
        assert!(table.contains("{1,2,3}"));
        assert!(table.contains("verdict entangled"));
        assert!(table.contains("threshold 0.5"));
        let full = r.record(PartySet::full(3)).unwrap();
        let mut rows = csv::Reader::from_reader(csv.as_bytes());
        let last = rows.records().last().unwrap().unwrap();
        assert_eq!(&last[0], "1 2 3");
        assert_eq!(last[1].parse::<f64>().unwrap(), full.strength);
    }

    #[test]
    fn formats_parse() {
        for f in [Format::Table, Format::JsonLines, Format::Csv] {
            assert_eq!(f.to_string().parse::<Format>().unwrap(), f);
        }
        assert!("xml".parse::<Format>().is_err());
    }
}
