//! Tabular experiment output.
//!
//! CSV columns, in order:
//! `experiment,family,n,threshold,statistic,value,ci_low,ci_high,replications,seed`.
//! Floats use the shortest decimal that round-trips; absent optional
//! values are empty cells in CSV and `null` in JSON.

use serde::{Deserialize, Serialize};

use super::stats::{MeanEstimate, TailEstimate};
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 10] = [
    "experiment",
    "family",
    "n",
    "threshold",
    "statistic",
    "value",
    "ci_low",
    "ci_high",
    "replications",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRow {
    pub experiment: String,
    pub family: String,
    pub n: u64,
    pub threshold: Option<f64>,
    pub statistic: String,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub replications: u64,
    pub seed: u64,
}

/// A cell that failed a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flag {
    pub n: u64,
    pub threshold: Option<f64>,
    pub statistic: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub family: String,
    pub seed: u64,
    pub replications: u64,
    pub version: String,
    pub rows: Vec<ResultRow>,
    pub flags: Vec<Flag>,
    /// Echo of the configuration that produced the rows.
    #[serde(default)]
    pub metadata: serde_json::Value,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl ExperimentResult {
    pub fn new(experiment: &str, family: &str, seed: u64, replications: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            family: family.to_owned(),
            seed,
            replications,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            rows: Vec::new(),
            flags: Vec::new(),
            metadata: serde_json::Value::Null,
        }
    }

    pub fn push(
        &mut self,
        n: u64,
        threshold: Option<f64>,
        statistic: &str,
        value: f64,
        ci: Option<(f64, f64)>,
    ) {
        self.rows.push(ResultRow {
            experiment: self.experiment.clone(),
            family: self.family.clone(),
            n,
            threshold,
            statistic: statistic.to_owned(),
            value,
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
            replications: self.replications,
            seed: self.seed,
        });
    }

    pub fn push_tail(&mut self, n: u64, threshold: Option<f64>, statistic: &str, t: &TailEstimate) {
        self.push(n, threshold, statistic, t.p_hat, Some((t.ci_low, t.ci_high)));
    }

    pub fn push_mean(&mut self, n: u64, threshold: Option<f64>, statistic: &str, m: &MeanEstimate) {
        self.push(n, threshold, statistic, m.mean, Some((m.ci_low, m.ci_high)));
    }

    pub fn flag(&mut self, n: u64, threshold: Option<f64>, statistic: &str, message: String) {
        self.flags.push(Flag {
            n,
            threshold,
            statistic: statistic.to_owned(),
            message,
        });
    }

    /// Rows with the given statistic, in insertion order.
    pub fn rows_named<'a>(&'a self, statistic: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }

    /// The unique row matching `(statistic, n, threshold)`.
    pub fn find(&self, statistic: &str, n: u64, threshold: Option<f64>) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.statistic == statistic && r.n == n && r.threshold == threshold)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.clone(),
                r.family.clone(),
                r.n.to_string(),
                fmt_opt(r.threshold),
                r.statistic.clone(),
                fmt_f64(r.value),
                fmt_opt(r.ci_low),
                fmt_opt(r.ci_high),
                r.replications.to_string(),
                r.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn parse_opt(field: &str, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(field, s).map(Some)
    }
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Config(format!("column `{field}`: `{s}` is not a number")))
}

fn parse_u64(field: &str, s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::Config(format!("column `{field}`: `{s}` is not an integer")))
}

/// Parse rows written by [`ExperimentResult::to_csv`], checking the header.
pub fn rows_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(csv_err)?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != CSV_COLUMNS {
        let missing: Vec<&str> = CSV_COLUMNS
            .iter()
            .copied()
            .filter(|c| !got.contains(c))
            .collect();
        return Err(Error::Config(format!(
            "unexpected CSV header {got:?}; missing columns {missing:?}"
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(ResultRow {
            experiment: rec[0].to_owned(),
            family: rec[1].to_owned(),
            n: parse_u64("n", &rec[2])?,
            threshold: parse_opt("threshold", &rec[3])?,
            statistic: rec[4].to_owned(),
            value: parse_f64("value", &rec[5])?,
            ci_low: parse_opt("ci_low", &rec[6])?,
            ci_high: parse_opt("ci_high", &rec[7])?,
            replications: parse_u64("replications", &rec[8])?,
            seed: parse_u64("seed", &rec[9])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentResult {
        let mut r = ExperimentResult::new("demo", "power_law", 7, 100);
        r.push(10, Some(0.5), "p", 0.1, Some((0.05, 0.2)));
        r.push(20, None, "mean", 1e-7, None);
        r
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "demo,power_law,10,0.5,p,0.1,0.05,0.2,100,7");
        assert_eq!(lines.next().unwrap(), "demo,power_law,20,,mean,1e-7,,,100,7");
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        assert_eq!(rows_from_csv(&r.to_csv().unwrap()).unwrap(), r.rows);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: ExperimentResult = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bad_header_names_missing_columns() {
        let err = rows_from_csv("experiment,family,n\n").unwrap_err().to_string();
        assert!(err.contains("statistic"), "{err}");
    }
}
