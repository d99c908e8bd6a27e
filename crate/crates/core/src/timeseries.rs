//! Dated economic series: CSV ingestion, frequency alignment, velocity
//! construction, log-returns and train/holdout splitting.
//!
//! Series are sampled on a uniform calendar grid whose step is a whole
//! number of months (quarterly data has `period == 0.25`). Spacing is
//! checked on month indices, so quarter-start and quarter-end stamping are
//! both accepted.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};
use crate::io::format_sig12;

/// Default sampling period in years (quarterly).
pub const QUARTERLY: f64 = 0.25;

/// Join window used when pairing observations from two providers.
pub const JOIN_WINDOW_DAYS: i64 = 15;

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Strictly positive levels (GDP, money stock, velocity).
    Level,
    /// Transformed values such as log-returns; any finite value is allowed.
    Returns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    period: f64,
    kind: SeriesKind,
}

fn month_index(d: NaiveDate) -> i64 {
    d.year() as i64 * 12 + d.month0() as i64
}

fn period_months(period: f64) -> Result<i64> {
    let months = period * 12.0;
    if !(months.is_finite() && months >= 1.0 - 1e-9 && (months - months.round()).abs() < 1e-9) {
        return Err(Error::InvalidSeries(format!(
            "period {period} years is not a whole number of months"
        )));
    }
    Ok(months.round() as i64)
}

impl TimeSeries {
    /// Builds a series after checking every structural invariant.
    pub fn new(
        name: impl Into<String>,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
        period: f64,
        kind: SeriesKind,
    ) -> Result<Self> {
        let name = name.into();
        if dates.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{name}: {} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if dates.is_empty() {
            return Err(Error::InvalidSeries(format!("{name}: series is empty")));
        }
        let step = period_months(period)?;
        for (i, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidSeries(format!(
                    "{name}: dates not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
            let gap = month_index(w[1]) - month_index(w[0]);
            if gap != step {
                return Err(Error::InvalidSeries(format!(
                    "{name}: non-uniform spacing at observation {}: {} -> {} is {gap} months, expected {step}",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        for (d, v) in dates.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::InvalidSeries(format!(
                    "{name}: non-finite value at {d}"
                )));
            }
            if kind == SeriesKind::Level && *v <= 0.0 {
                return Err(Error::InvalidSeries(format!(
                    "{name}: non-positive value {v} at {d}"
                )));
            }
        }
        Ok(Self {
            name,
            dates,
            values,
            period,
            kind,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sampling period in years.
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last_date(&self) -> NaiveDate {
        self.dates[self.dates.len() - 1]
    }

    pub fn last_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        TimeSeries::new(
            self.name.clone(),
            self.dates.clone(),
            self.values.iter().map(|v| v * factor).collect(),
            self.period,
            self.kind,
        )
    }

    /// `DATE,VALUE` CSV with values at 12 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("DATE,VALUE\n");
        for (d, v) in self.dates.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", d.format(DATE_FORMAT), format_sig12(*v));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Parses a two-column `DATE,VALUE` file as exported by FRED.
///
/// The value column header becomes the series name. The sampling period is
/// inferred from the first gap (quarterly for a single row).
pub fn parse_series_csv(text: &str) -> Result<TimeSeries> {
    parse_series_csv_as(text, SeriesKind::Level)
}

pub fn parse_series_csv_as(text: &str, kind: SeriesKind) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() != 2 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected 2 header columns, found {}", headers.len()),
        });
    }
    let name = headers.get(1).unwrap_or("VALUE").to_string();

    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut missing = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let date =
            NaiveDate::parse_from_str(&record[0], DATE_FORMAT).map_err(|e| Error::Parse {
                line,
                msg: format!("malformed date {:?}: {e}", &record[0]),
            })?;
        let raw = &record[1];
        if raw == "." {
            missing.push(line);
            continue;
        }
        let value: f64 = raw.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("non-numeric value {raw:?}"),
        })?;
        if kind == SeriesKind::Level && !(value > 0.0) {
            return Err(Error::Parse {
                line,
                msg: format!("non-positive value {value}"),
            });
        }
        dates.push(date);
        values.push(value);
    }
    if !missing.is_empty() {
        return Err(Error::MissingValues(missing));
    }
    if dates.is_empty() {
        return Err(Error::InvalidSeries(format!("{name}: no observations")));
    }
    let period = if dates.len() >= 2 {
        let gap = month_index(dates[1]) - month_index(dates[0]);
        if gap < 1 {
            return Err(Error::InvalidSeries(format!(
                "{name}: first two dates {} and {} share a month",
                dates[0], dates[1]
            )));
        }
        gap as f64 / 12.0
    } else {
        QUARTERLY
    };
    TimeSeries::new(name, dates, values, period, kind)
}

pub fn read_series_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let text = fs::read_to_string(path)?;
    parse_series_csv(&text)
}

/// How sub-period observations are combined when downsampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Average over the period (FRED's default for stocks such as M2).
    #[default]
    Mean,
    /// Final observation of the period.
    Last,
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mean" => Ok(Aggregation::Mean),
            "last" => Ok(Aggregation::Last),
            other => Err(Error::InvalidParameter(format!(
                "aggregation {other:?}; expected mean or last"
            ))),
        }
    }
}

impl std::fmt::Display for Aggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Last => "last",
        })
    }
}

/// Downsamples to a coarser period. Only complete target periods are kept;
/// output dates are stamped at the first day of the target period, the FRED
/// convention for quarterly aggregates.
pub fn downsample(series: &TimeSeries, target_period: f64, how: Aggregation) -> Result<TimeSeries> {
    let src = period_months(series.period)?;
    let dst = period_months(target_period)?;
    if dst == src {
        return Ok(series.clone());
    }
    if dst < src || dst % src != 0 {
        return Err(Error::Mismatch(format!(
            "cannot downsample a {src}-month series to {dst} months"
        )));
    }
    let per_bucket = (dst / src) as usize;
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut bucket: Option<(i64, Vec<f64>)> = None;
    let mut flush = |bucket: Option<(i64, Vec<f64>)>| {
        if let Some((start, vals)) = bucket {
            if vals.len() == per_bucket {
                let year = start.div_euclid(12) as i32;
                let month = start.rem_euclid(12) as u32 + 1;
                dates.push(NaiveDate::from_ymd_opt(year, month, 1).expect("valid month start"));
                values.push(match how {
                    Aggregation::Mean => vals.iter().sum::<f64>() / vals.len() as f64,
                    Aggregation::Last => vals[vals.len() - 1],
                });
            }
        }
    };
    for (d, v) in series.dates.iter().zip(&series.values) {
        let m = month_index(*d);
        let start = m - m.rem_euclid(dst);
        match &mut bucket {
            Some((s, vals)) if *s == start => vals.push(*v),
            _ => {
                flush(bucket.take());
                bucket = Some((start, vec![*v]));
            }
        }
    }
    flush(bucket);
    if dates.is_empty() {
        return Err(Error::InvalidSeries(format!(
            "{}: no complete {dst}-month period",
            series.name
        )));
    }
    TimeSeries::new(
        series.name.clone(),
        dates,
        values,
        target_period,
        series.kind,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySeries {
    series: TimeSeries,
    numerator: String,
    denominator: String,
}

impl VelocitySeries {
    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn into_series(self) -> TimeSeries {
        self.series
    }

    /// Labels of the (GDP, money) inputs.
    pub fn sources(&self) -> (&str, &str) {
        (&self.numerator, &self.denominator)
    }
}

/// V(t) = gdp(t) / money(t) on the common dates of both series.
///
/// Dates are paired when they fall within [`JOIN_WINDOW_DAYS`] of each other;
/// the GDP date labels the result.
pub fn velocity_from(gdp: &TimeSeries, money: &TimeSeries) -> Result<VelocitySeries> {
    if period_months(gdp.period)? != period_months(money.period)? {
        return Err(Error::Mismatch(format!(
            "period mismatch: {} has {} years, {} has {} years",
            gdp.name, gdp.period, money.name, money.period
        )));
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut j = 0;
    for (d, x) in gdp.dates.iter().zip(&gdp.values) {
        while j < money.dates.len() && (money.dates[j] - *d).num_days() < -JOIN_WINDOW_DAYS {
            j += 1;
        }
        if j == money.dates.len() {
            break;
        }
        if (money.dates[j] - *d).num_days().abs() <= JOIN_WINDOW_DAYS {
            dates.push(*d);
            values.push(x / money.values[j]);
        }
    }
    if dates.is_empty() {
        return Err(Error::Mismatch(format!(
            "{} and {} have no dates in common",
            gdp.name, money.name
        )));
    }
    let series = TimeSeries::new("VELOCITY", dates, values, gdp.period, SeriesKind::Level)?;
    Ok(VelocitySeries {
        series,
        numerator: gdp.name.clone(),
        denominator: money.name.clone(),
    })
}

/// r_i = ln(x_{i+1} / x_i), dated at the later endpoint.
pub fn log_returns(series: &TimeSeries) -> Result<TimeSeries> {
    if series.len() < 2 {
        return Err(Error::InvalidSeries(format!(
            "{}: log-returns need at least 2 observations",
            series.name
        )));
    }
    if let Some((d, v)) = series
        .dates
        .iter()
        .zip(&series.values)
        .find(|(_, v)| !(**v > 0.0))
    {
        return Err(Error::InvalidSeries(format!(
            "{}: non-positive value {v} at {d}",
            series.name
        )));
    }
    let values = series
        .values
        .windows(2)
        .map(|w| (w[1] / w[0]).ln())
        .collect();
    TimeSeries::new(
        format!("{}_LOGRET", series.name),
        series.dates[1..].to_vec(),
        values,
        series.period,
        SeriesKind::Returns,
    )
}

/// Splits into observations strictly before `boundary` and the rest.
/// Both parts must be non-empty.
pub fn split_at(series: &TimeSeries, boundary: NaiveDate) -> Result<(TimeSeries, TimeSeries)> {
    let cut = series.dates.partition_point(|d| *d < boundary);
    if cut == 0 || cut == series.len() {
        return Err(Error::InvalidParameter(format!(
            "split date {boundary} leaves an empty part of {} ({} to {})",
            series.name,
            series.first_date(),
            series.last_date()
        )));
    }
    let part = |range: std::ops::Range<usize>| {
        TimeSeries::new(
            series.name.clone(),
            series.dates[range.clone()].to_vec(),
            series.values[range].to_vec(),
            series.period,
            series.kind,
        )
    };
    Ok((part(0..cut)?, part(cut..series.len())?))
}
