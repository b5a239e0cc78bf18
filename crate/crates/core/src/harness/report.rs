//! Reports: named sections of metric rows, exported as JSON or CSV.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decomposition::Audit;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured quantity without an asserted bound.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        })
    }
}

impl FromStr for Status {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            "info" => Ok(Status::Info),
            other => Err(Error::Parse(format!("unknown status {other:?}"))),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Row {
    pub metric: String,
    pub value: String,
    pub bound: String,
    pub status: Status,
    /// The invariant the bound instantiates.
    pub provenance: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub rows: Vec<Row>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    /// An asserted check.
    pub fn check(&mut self, metric: impl Into<String>, ok: bool, value: impl Into<String>, bound: impl Into<String>, provenance: &str) {
        self.rows.push(Row {
            metric: metric.into(),
            value: value.into(),
            bound: bound.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            provenance: provenance.into(),
        });
    }

    /// A measured value with no asserted bound.
    pub fn info(&mut self, metric: impl Into<String>, value: impl Into<String>, provenance: &str) {
        self.rows.push(Row {
            metric: metric.into(),
            value: value.into(),
            bound: String::new(),
            status: Status::Info,
            provenance: provenance.into(),
        });
    }

    /// One row per audited postcondition; the value is the instance count
    /// or the first failure.
    pub fn audit(&mut self, prefix: &str, audit: &Audit, provenance: &str) {
        for c in &audit.checks {
            let value = if c.passed {
                format!("{} instances", c.instances)
            } else {
                format!("first failure: {}", c.detail)
            };
            self.check(format!("{prefix}{}", c.name), c.passed, value, "exact", provenance);
        }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub sections: Vec<Section>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// Column order of the CSV export.
pub const CSV_COLUMNS: [&str; 6] = ["section", "metric", "value", "bound", "status", "provenance"];

#[derive(Serialize, Deserialize)]
struct FlatRow {
    section: String,
    metric: String,
    value: String,
    bound: String,
    status: String,
    provenance: String,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// The section called `name`, created at the end if missing.
    pub fn section(&mut self, name: &str) -> &mut Section {
        let idx = match self.sections.iter().position(|s| s.name == name) {
            Some(i) => i,
            None => {
                self.sections.push(Section::new(name));
                self.sections.len() - 1
            }
        };
        &mut self.sections[idx]
    }

    pub fn merge(&mut self, other: Report) {
        for s in other.sections {
            self.section(&s.name).rows.extend(s.rows);
        }
    }

    pub fn passed(&self) -> bool {
        self.sections.iter().all(Section::passed)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &Row)> {
        self.sections.iter().flat_map(|s| s.rows.iter().map(move |r| (s.name.as_str(), r)))
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Row)> {
        self.rows().filter(|(_, r)| r.status == Status::Fail)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for (section, r) in self.rows() {
            w.serialize(FlatRow {
                section: section.to_string(),
                metric: r.metric.clone(),
                value: r.value.clone(),
                bound: r.bound.clone(),
                status: r.status.to_string(),
                provenance: r.provenance.clone(),
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Rebuilds sections in order of first appearance.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if headers != CSV_COLUMNS {
            return Err(Error::Parse(format!("unexpected columns {headers:?}")));
        }
        let mut report = Report::new();
        for rec in r.deserialize::<FlatRow>() {
            let rec = rec?;
            report.section(&rec.section).push(Row {
                metric: rec.metric,
                value: rec.value,
                bound: rec.bound,
                status: rec.status.parse()?,
                provenance: rec.provenance,
            });
        }
        Ok(report)
    }

    pub fn render(&self, format: ExportFormat) -> Result<String> {
        match format {
            ExportFormat::Json => self.to_json_string(),
            ExportFormat::Csv => self.to_csv_string(),
        }
    }
}

/// Write the report to `path`.
pub fn export(report: &Report, format: ExportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, report.render(format)?)?;
    Ok(())
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sections {
            writeln!(f, "== {} ==", s.name)?;
            for r in &s.rows {
                let bound = if r.bound.is_empty() { String::new() } else { format!(" [bound: {}]", r.bound) };
                writeln!(f, "  [{}] {}: {}{}", r.status, r.metric, r.value, bound)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new();
        r.section("a").check("x, with comma", true, "1", "<= 2", "inv \"one\"");
        r.section("b").info("y", "3.5", "measured");
        r.section("a").check("z", false, "9", "<= 2", "inv two");
        r
    }

    #[test]
    fn json_and_csv_round_trip() {
        let r = sample();
        assert_eq!(Report::from_json_str(&r.to_json_string().unwrap()).unwrap(), r);
        let csv = r.to_csv_string().unwrap();
        assert!(csv.starts_with("section,metric,value,bound,status,provenance\n"));
        assert_eq!(Report::from_csv_str(&csv).unwrap(), r);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn empty_report_exports() {
        let r = Report::new();
        assert_eq!(Report::from_json_str(&r.to_json_string().unwrap()).unwrap(), r);
        assert_eq!(r.to_csv_string().unwrap(), "section,metric,value,bound,status,provenance\n");
        assert_eq!(Report::from_csv_str(&r.to_csv_string().unwrap()).unwrap(), r);
        assert!(r.passed());
    }
}
