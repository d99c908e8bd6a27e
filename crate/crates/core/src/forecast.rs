//! Monte Carlo velocity forecasts and operator-image ensembles.

use std::fmt::Write as _;

use chrono::{Months, NaiveDate};
use rayon::prelude::*;

use crate::emo::{z_velocity_path, EmoConfig};
use crate::ergodicity::Ensemble;
use crate::error::{invalid_param, Result};
use crate::io::format_sig12;
use crate::stochastic::{driver_pair, substream, DriverMode, GbmParams, WienerPath};
use crate::timeseries::QUARTERLY;

pub const DEFAULT_QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
pub const MIN_FORECAST_PATHS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOptions {
    /// Date of the anchoring observation `v0`.
    pub start: NaiveDate,
    /// Step between forecast dates, in years.
    pub period: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub driver_mode: DriverMode,
    pub quantiles: Vec<f64>,
}

impl Default for ForecastOptions {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
            period: QUARTERLY,
            horizon: 5.0,
            n_paths: 10_000,
            seed: 0,
            driver_mode: DriverMode::Shared,
            quantiles: DEFAULT_QUANTILES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastFan {
    pub dates: Vec<NaiveDate>,
    /// Years since the anchor date.
    pub times: Vec<f64>,
    pub mean_path: Vec<f64>,
    pub quantile_levels: Vec<f64>,
    /// `quantiles[j][i]` is level `j` at date `i`.
    pub quantiles: Vec<Vec<f64>>,
    pub n_paths: usize,
    pub seed: u64,
}

impl ForecastFan {
    /// Spread between the outermost quantiles at each date.
    pub fn width(&self) -> Vec<f64> {
        let lo = &self.quantiles[0];
        let hi = &self.quantiles[self.quantiles.len() - 1];
        hi.iter().zip(lo).map(|(h, l)| h - l).collect()
    }

    /// `date,mean,q05,q25,...`
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("date,mean");
        for q in &self.quantile_levels {
            let _ = write!(out, ",q{:02}", (q * 100.0).round() as u32);
        }
        out.push('\n');
        for (i, d) in self.dates.iter().enumerate() {
            let _ = write!(
                out,
                "{},{}",
                d.format("%Y-%m-%d"),
                format_sig12(self.mean_path[i])
            );
            for q in &self.quantiles {
                let _ = write!(out, ",{}", format_sig12(q[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// E[V_t] = v0 exp((mu_X - mu_M + sigma_M^2 - rho sigma_X sigma_M) t), with
/// rho the driver correlation (1 for a shared driver).
pub fn analytic_mean(
    v0: f64,
    params_x: GbmParams,
    params_m: GbmParams,
    mode: DriverMode,
    t: f64,
) -> f64 {
    let rho = mode.correlation();
    let g = params_x.mu - params_m.mu + params_m.sigma * params_m.sigma
        - rho * params_x.sigma * params_m.sigma;
    v0 * (g * t).exp()
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn step_count(horizon: f64, period: f64) -> Result<usize> {
    let steps = horizon / period;
    if !(steps >= 1.0 - 1e-9) || (steps - steps.round()).abs() > 1e-9 {
        return Err(invalid_param(format!(
            "horizon {horizon} is not a whole number of {period}-year steps"
        )));
    }
    Ok(steps.round() as usize)
}

/// Velocity paths V_t = v0 (X_t / X_0) / (M_t / M_0) from the closed-form
/// GBM solutions, summarized by their mean and quantiles at each forecast date.
pub fn forecast_velocity(
    v0: f64,
    params_x: GbmParams,
    params_m: GbmParams,
    options: &ForecastOptions,
) -> Result<ForecastFan> {
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(invalid_param(format!(
            "initial velocity must be positive, got {v0}"
        )));
    }
    if !(options.horizon > 0.0) {
        return Err(invalid_param(format!(
            "horizon must be positive, got {}",
            options.horizon
        )));
    }
    if options.n_paths < MIN_FORECAST_PATHS {
        return Err(invalid_param(format!(
            "need at least {MIN_FORECAST_PATHS} paths, got {}",
            options.n_paths
        )));
    }
    if options.quantiles.is_empty()
        || options.quantiles.iter().any(|q| !(0.0..=1.0).contains(q))
        || options.quantiles.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(invalid_param(
            "quantile levels must be increasing within [0, 1]",
        ));
    }
    options.driver_mode.validate()?;
    let n_steps = step_count(options.horizon, options.period)?;
    let months = (options.period * 12.0).round() as u32;
    let drift = params_x.log_drift() - params_m.log_drift();

    let paths: Vec<Vec<f64>> = (0..options.n_paths as u64)
        .into_par_iter()
        .map(|k| {
            let (wx, wm) = driver_pair(
                options.horizon,
                n_steps,
                options.seed,
                k,
                options.driver_mode,
            )?;
            Ok(wx
                .times()
                .iter()
                .zip(wx.values().iter().zip(wm.values()))
                .map(|(t, (a, b))| v0 * (drift * t + params_x.sigma * a - params_m.sigma * b).exp())
                .collect())
        })
        .collect::<Result<_>>()?;

    let points = n_steps + 1;
    let mut mean_path = Vec::with_capacity(points);
    let mut quantiles = vec![Vec::with_capacity(points); options.quantiles.len()];
    let mut column = vec![0.0; paths.len()];
    for i in 0..points {
        for (c, p) in column.iter_mut().zip(&paths) {
            *c = p[i];
        }
        mean_path.push(column.iter().sum::<f64>() / column.len() as f64);
        column.sort_by(f64::total_cmp);
        for (q, level) in quantiles.iter_mut().zip(&options.quantiles) {
            q.push(quantile_sorted(&column, *level));
        }
    }
    let dates = (0..points)
        .map(|i| {
            options
                .start
                .checked_add_months(Months::new(months * i as u32))
                .ok_or_else(|| invalid_param("forecast date out of range"))
        })
        .collect::<Result<_>>()?;
    let times = (0..points).map(|i| i as f64 * options.period).collect();
    Ok(ForecastFan {
        dates,
        times,
        mean_path,
        quantile_levels: options.quantiles.clone(),
        quantiles,
        n_paths: options.n_paths,
        seed: options.seed,
    })
}

/// `n_paths` operator images of log-velocity, member `k` driven by
/// substream `k` of `seed`, on an `n_steps` grid over `[0, T]`.
pub fn simulate_z_ensemble(
    params_x: GbmParams,
    params_m: GbmParams,
    config: &EmoConfig,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Ensemble> {
    if n_paths == 0 {
        return Err(invalid_param("ensemble needs at least one path"));
    }
    let paths: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|k| {
            let w = WienerPath::generate(config.horizon(), n_steps, seed, substream(k, 0))?;
            Ok(z_velocity_path(params_x, params_m, config, &w)?.values)
        })
        .collect::<Result<_>>()?;
    let grid = WienerPath::from_values(config.horizon(), vec![0.0; n_steps + 1])?
        .times()
        .to_vec();
    Ensemble::new(grid, paths)
}
