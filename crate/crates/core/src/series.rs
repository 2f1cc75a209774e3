//! Date-indexed daily series and their CSV representation.
//!
//! The CSV form is a `# label: <tag>` comment line followed by a
//! `date,value` header. A missing value is an empty field.

use std::io::{BufRead, BufReader, Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One scalar per trading day. `None` marks a missing value, e.g. the log
/// of a zero-volatility day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    label: String,
    dates: Vec<NaiveDate>,
    values: Vec<Option<f64>>,
}

impl DailySeries {
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        Self::with_missing(label, dates, values.into_iter().map(Some).collect())
    }

    pub fn with_missing(
        label: impl Into<String>,
        dates: Vec<NaiveDate>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::validation(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_some_and(|x| !x.is_finite()))
        {
            return Err(Error::validation(format!(
                "non-finite value {:?} on {}",
                v, dates[i]
            )));
        }
        Ok(Self {
            label: label.into(),
            dates,
            values,
        })
    }

    /// Series over synthetic consecutive calendar dates starting 2000-01-01.
    /// Handy for feeding plain vectors through date-indexed APIs.
    pub fn from_values(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = start.iter_days().take(values.len()).collect();
        Self::new(label, dates, values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Present values in date order, together with the number skipped.
    pub fn present(&self) -> (Vec<f64>, usize) {
        let xs: Vec<f64> = self.values.iter().flatten().copied().collect();
        let skipped = self.values.len() - xs.len();
        if skipped > 0 {
            log::warn!("{}: skipping {} missing values", self.label, skipped);
        }
        (xs, skipped)
    }

    /// Same dates and label, values mapped through `f`.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::with_missing(
            label,
            self.dates.clone(),
            self.values.iter().map(|v| v.map(&f)).collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# label: {}", self.label)?;
        writeln!(out, "date,value")?;
        for (d, v) in self.dates.iter().zip(&self.values) {
            match v {
                Some(x) => writeln!(out, "{},{}", d, x)?,
                None => writeln!(out, "{},", d)?,
            }
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let reader = BufReader::new(source);
        let mut label = String::from("series");
        let mut dates = Vec::new();
        let mut values = Vec::new();
        let mut saw_header = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(l) = rest.trim().strip_prefix("label:") {
                    label = l.trim().to_string();
                }
                continue;
            }
            if !saw_header {
                if line != "date,value" {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected header `date,value`, found `{line}`"),
                    });
                }
                saw_header = true;
                continue;
            }
            let (d, v) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected two fields".into(),
            })?;
            let date = d.trim().parse::<NaiveDate>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad date `{d}`: {e}"),
            })?;
            let value = match v.trim() {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad value `{s}`: {e}"),
                })?),
            };
            dates.push(date);
            values.push(value);
        }
        if !saw_header {
            return Err(Error::Parse {
                line: 1,
                msg: "missing `date,value` header".into(),
            });
        }
        Self::with_missing(label, dates, values)
    }
}
