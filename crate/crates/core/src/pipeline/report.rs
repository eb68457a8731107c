use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{FitStatus, TailResult, TimescaleResult};
use crate::error::{Error, Result};

/// Column order of the event-time and clock-time tables.
pub const REPORT_COLUMNS: [&str; 11] = [
    "dt",
    "skewness",
    "kurtosis",
    "L",
    "alpha",
    "pos_range",
    "alpha_pos",
    "alpha_pos_stderr",
    "neg_range",
    "alpha_neg",
    "alpha_neg_stderr",
];

const VALUE_DIGITS: usize = 4;
const STDERR_DIGITS: usize = 2;

/// One table row, already rounded to report precision. Fits that failed are
/// empty; fits that ran but did not converge keep their values and are
/// flagged in the diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dt: u32,
    pub skewness: f64,
    pub kurtosis: f64,
    #[serde(rename = "L")]
    pub scale: Option<f64>,
    pub alpha: Option<f64>,
    /// `lo,hi` in units of standardized return.
    pub pos_range: String,
    pub alpha_pos: Option<f64>,
    pub alpha_pos_stderr: Option<f64>,
    pub neg_range: String,
    pub alpha_neg: Option<f64>,
    pub alpha_neg_stderr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

/// `x` rounded to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn sig(x: f64) -> f64 {
    round_significant(x, VALUE_DIGITS)
}

fn tail_cells(tail: &TailResult) -> (String, Option<f64>, Option<f64>) {
    match &tail.fit {
        FitStatus::Fitted(fit) => (
            format!("{},{}", sig(fit.scaling_range.0), sig(fit.scaling_range.1)),
            Some(sig(fit.exponent)),
            Some(round_significant(fit.stderr, STDERR_DIGITS)),
        ),
        FitStatus::Failed { .. } => (tail.range.to_string(), None, None),
    }
}

impl ReportRow {
    pub fn from_result(r: &TimescaleResult) -> Self {
        let (scale, alpha) = match &r.student {
            FitStatus::Fitted(f) => (Some(sig(f.params.scale)), Some(sig(f.params.alpha))),
            FitStatus::Failed { .. } => (None, None),
        };
        let (pos_range, alpha_pos, alpha_pos_stderr) = tail_cells(&r.positive);
        let (neg_range, alpha_neg, alpha_neg_stderr) = tail_cells(&r.negative);
        ReportRow {
            dt: r.timescale.delta(),
            skewness: sig(r.moments.skewness),
            kurtosis: sig(r.moments.kurtosis),
            scale,
            alpha,
            pos_range,
            alpha_pos,
            alpha_pos_stderr,
            neg_range,
            alpha_neg,
            alpha_neg_stderr,
        }
    }

    fn cells(&self) -> [String; 11] {
        let num = |v: f64| v.to_string();
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        [
            self.dt.to_string(),
            num(self.skewness),
            num(self.kurtosis),
            opt(self.scale),
            opt(self.alpha),
            self.pos_range.clone(),
            opt(self.alpha_pos),
            opt(self.alpha_pos_stderr),
            self.neg_range.clone(),
            opt(self.alpha_neg),
            opt(self.alpha_neg_stderr),
        ]
    }
}

/// Writes one table. An empty slice yields a header-only CSV or `[]`.
pub fn emit_report<W: Write>(
    rows: &[ReportRow],
    format: ReportFormat,
    mut writer: W,
) -> Result<()> {
    let io = |e: std::io::Error| Error::io("<report>", e);
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            let csv_err = |e: csv::Error| Error::io("<report>", std::io::Error::other(e));
            w.write_record(REPORT_COLUMNS).map_err(csv_err)?;
            for row in rows {
                w.write_record(row.cells()).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut writer, rows)
                .map_err(|e| Error::io("<report>", e.into()))?;
            writer.write_all(b"\n").map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_report_json<R: Read>(reader: R) -> Result<Vec<ReportRow>> {
    serde_json::from_reader(reader).map_err(|e| Error::Config(format!("report JSON: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            dt: 1,
            skewness: 0.005,
            kurtosis: 34.21,
            scale: Some(1.9),
            alpha: Some(3.1),
            pos_range: "2.4,60.3".into(),
            alpha_pos: Some(3.12),
            alpha_pos_stderr: Some(0.02),
            neg_range: "2.1,60.3".into(),
            alpha_neg: None,
            alpha_neg_stderr: None,
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(round_significant(1.23456, 4), 1.235);
        assert_eq!(round_significant(0.0123456, 2), 0.012);
        assert_eq!(round_significant(-1234567.0, 4), -1235000.0);
        assert_eq!(round_significant(0.0, 4), 0.0);
        assert_eq!(round_significant(0.0199, 2).to_string(), "0.02");
    }

    #[test]
    fn csv_has_header_and_one_line() {
        let mut buf = Vec::new();
        emit_report(&[row()], ReportFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], REPORT_COLUMNS.join(","));
        assert_eq!(
            lines[1],
            r#"1,0.005,34.21,1.9,3.1,"2.4,60.3",3.12,0.02,"2.1,60.3",,"#
        );
    }

    #[test]
    fn json_round_trip() {
        let rows = vec![row(), ReportRow { dt: 2, ..row() }];
        let mut buf = Vec::new();
        emit_report(&rows, ReportFormat::Json, &mut buf).unwrap();
        assert_eq!(read_report_json(buf.as_slice()).unwrap(), rows);
        let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let keys: Vec<&str> = value[0]
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        let mut expected = REPORT_COLUMNS.to_vec();
        expected.sort_unstable();
        let mut keys = keys;
        keys.sort_unstable();
        assert_eq!(keys, expected);
    }

    #[test]
    fn empty_tables() {
        let mut buf = Vec::new();
        emit_report(&[], ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
        let mut buf = Vec::new();
        emit_report(&[], ReportFormat::Json, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), "[]");
    }
}
