//! Holdout scoring of velocity predictors against a constant-velocity
//! baseline.

use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::calibration::GbmEstimate;
use crate::error::{invalid_param, Error, Result};
use crate::forecast::analytic_mean;
use crate::io::format_sig12;
use crate::stochastic::DriverMode;
use crate::timeseries::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub sse: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
    pub k: usize,
}

/// SSE, R^2 against the mean of `actual`, adjusted R^2 for `k` parameters,
/// RMSE and MAE.
pub fn compute_metrics(predicted: &[f64], actual: &[f64], k: usize) -> Result<MetricsReport> {
    if predicted.len() != actual.len() {
        return Err(Error::Mismatch(format!(
            "{} predictions for {} observations",
            predicted.len(),
            actual.len()
        )));
    }
    let n = actual.len();
    if n <= k + 1 {
        return Err(invalid_param(format!(
            "adjusted R^2 needs more than {} observations for k = {k}, got {n}",
            k + 1
        )));
    }
    let nf = n as f64;
    let mean = actual.iter().sum::<f64>() / nf;
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::Degenerate(
            "actual values have zero variance; R^2 undefined".into(),
        ));
    }
    let sse: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (a - p).powi(2))
        .sum();
    let mae = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (a - p).abs())
        .sum::<f64>()
        / nf;
    let r2 = 1.0 - sse / sst;
    Ok(MetricsReport {
        sse,
        r2,
        adj_r2: 1.0 - (1.0 - r2) * (nf - 1.0) / (nf - k as f64 - 1.0),
        rmse: (sse / nf).sqrt(),
        mae,
        n,
        k,
    })
}

/// A deterministic velocity path as a function of the calendar date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predictor {
    Constant(f64),
    /// `level * exp(growth * years since anchor)`.
    Exponential {
        anchor: NaiveDate,
        level: f64,
        growth: f64,
    },
}

fn years_between(from: NaiveDate, to: NaiveDate) -> f64 {
    let months = (to.year() - from.year()) as f64 * 12.0 + to.month() as f64 - from.month() as f64;
    months / 12.0 + (to.day() as f64 - from.day() as f64) / 365.25
}

impl Predictor {
    pub fn level_at(&self, date: NaiveDate) -> f64 {
        match *self {
            Predictor::Constant(v) => v,
            Predictor::Exponential {
                anchor,
                level,
                growth,
            } => level * (growth * years_between(anchor, date)).exp(),
        }
    }
}

/// Constant velocity equal to the mean of the training window.
pub fn qtm_baseline(train_velocity: &TimeSeries) -> Result<Predictor> {
    if train_velocity.is_empty() {
        return Err(invalid_param("training window is empty"));
    }
    Ok(Predictor::Constant(train_velocity.mean()))
}

/// Expected velocity path of the calibrated model, anchored at `(anchor, v0)`.
pub fn log_ergodic_predictor(
    gdp: &GbmEstimate,
    money: &GbmEstimate,
    v0: f64,
    anchor: NaiveDate,
    mode: DriverMode,
) -> Result<Predictor> {
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(invalid_param(format!(
            "anchor velocity must be positive, got {v0}"
        )));
    }
    mode.validate()?;
    let growth = analytic_mean(1.0, gdp.params, money.params, mode, 1.0).ln();
    Ok(Predictor::Exponential {
        anchor,
        level: v0,
        growth,
    })
}

/// Whether predictions are scored on velocity levels or on log-returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvaluationSpace {
    #[default]
    Returns,
    Levels,
}

impl std::fmt::Display for EvaluationSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvaluationSpace::Returns => "returns",
            EvaluationSpace::Levels => "levels",
        })
    }
}

impl std::str::FromStr for EvaluationSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "returns" => Ok(EvaluationSpace::Returns),
            "levels" => Ok(EvaluationSpace::Levels),
            other => Err(invalid_param(format!(
                "evaluation space {other:?}; expected returns or levels"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    /// Number of fitted parameters, for adjusted R^2.
    pub k: usize,
    pub predictor: Predictor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub model: String,
    pub train: MetricsReport,
    pub holdout: MetricsReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub space: EvaluationSpace,
    pub train_label: String,
    pub holdout_label: String,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, model: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// `model,window,n,k,sse,r2,adj_r2,rmse,mae`
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("model,window,n,k,sse,r2,adj_r2,rmse,mae\n");
        for row in &self.rows {
            for (window, m) in [("train", &row.train), ("holdout", &row.holdout)] {
                let _ = writeln!(
                    out,
                    "{},{window},{},{},{},{},{},{},{}",
                    row.model,
                    m.n,
                    m.k,
                    format_sig12(m.sse),
                    format_sig12(m.r2),
                    format_sig12(m.adj_r2),
                    format_sig12(m.rmse),
                    format_sig12(m.mae)
                );
            }
        }
        out
    }

    /// Two aligned sub-tables: fit statistics on the training window, then
    /// RMSE/MAE on both windows.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let (tr, ho) = (&self.train_label, &self.holdout_label);
        let _ = writeln!(out, "evaluation space: {}", self.space);
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>10} {:>14} {:>18}",
            "Model",
            "SSE",
            "R-squared",
            "Adj R-squared",
            format!("RMSE({tr})")
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>10.4} {:>10.4} {:>14.4} {:>18.4}",
                r.model, r.train.sse, r.train.r2, r.train.adj_r2, r.train.rmse
            );
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<12} {:>18} {:>18} {:>18}",
            "Model",
            format!("RMSE({ho})"),
            format!("MAE({tr})"),
            format!("MAE({ho})")
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>18.4} {:>18.4} {:>18.4}",
                r.model, r.holdout.rmse, r.train.mae, r.holdout.mae
            );
        }
        out
    }
}

fn year_label(series: &TimeSeries) -> String {
    format!(
        "{}-{}",
        series.first_date().year(),
        series.last_date().year()
    )
}

/// (predicted, actual) for one window. In returns space the first return
/// of a window uses `previous` as its base observation.
fn window_targets(
    window: &TimeSeries,
    previous: Option<(NaiveDate, f64)>,
    predictor: &Predictor,
    space: EvaluationSpace,
) -> (Vec<f64>, Vec<f64>) {
    match space {
        EvaluationSpace::Levels => (
            window
                .dates()
                .iter()
                .map(|d| predictor.level_at(*d))
                .collect(),
            window.values().to_vec(),
        ),
        EvaluationSpace::Returns => {
            let points: Vec<(NaiveDate, f64)> = previous
                .into_iter()
                .chain(
                    window
                        .dates()
                        .iter()
                        .copied()
                        .zip(window.values().iter().copied()),
                )
                .collect();
            points
                .windows(2)
                .map(|w| {
                    let predicted = (predictor.level_at(w[1].0) / predictor.level_at(w[0].0)).ln();
                    (predicted, (w[1].1 / w[0].1).ln())
                })
                .unzip()
        }
    }
}

/// Scores every model on the training and holdout windows over identical
/// targets.
pub fn compare_models(
    train: &TimeSeries,
    holdout: &TimeSeries,
    models: &[Model],
    space: EvaluationSpace,
) -> Result<ComparisonTable> {
    if models.len() < 2 {
        return Err(invalid_param("comparison needs at least two models"));
    }
    if (train.period() - holdout.period()).abs() > 1e-12 {
        return Err(Error::Mismatch(
            "windows have different sampling periods".into(),
        ));
    }
    let months = (train.period() * 12.0).round() as u32;
    let expected = train
        .last_date()
        .checked_add_months(chrono::Months::new(months));
    if expected != Some(holdout.first_date()) {
        return Err(Error::Mismatch(format!(
            "holdout must start one period after {}, starts at {}",
            train.last_date(),
            holdout.first_date()
        )));
    }
    let previous = Some((train.last_date(), train.last_value()));
    let rows = models
        .iter()
        .map(|m| {
            let (p_tr, a_tr) = window_targets(train, None, &m.predictor, space);
            let (p_ho, a_ho) = window_targets(holdout, previous, &m.predictor, space);
            Ok(ComparisonRow {
                model: m.name.clone(),
                train: compute_metrics(&p_tr, &a_tr, m.k)?,
                holdout: compute_metrics(&p_ho, &a_ho, m.k)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonTable {
        space,
        train_label: year_label(train),
        holdout_label: year_label(holdout),
        rows,
    })
}
