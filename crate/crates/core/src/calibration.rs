//! Maximum-likelihood GBM calibration and the inhibition-degree sweep.

use std::fmt::Write as _;

use crate::error::{invalid_param, Error, Result};
use crate::io::format_sig12;
use crate::stochastic::GbmParams;
use crate::timeseries::{log_returns, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmEstimate {
    pub params: GbmParams,
    pub se_mu: f64,
    pub se_sigma: f64,
    /// Number of log-returns used.
    pub n_obs: usize,
    /// Observation spacing in years.
    pub dt: f64,
    /// Set when the returns have zero variance; standard errors are then 0.
    pub degenerate: bool,
}

/// GBM estimates from log-returns r of a level series sampled every dt years:
///
/// sigma^2 = var(r) / dt, mu = mean(r) / dt + sigma^2 / 2,
/// se(mu) = sigma / sqrt(n dt), se(sigma) = sigma / sqrt(2n).
///
/// `mu` carries the Ito correction, so it estimates the drift of the level
/// SDE rather than of its logarithm.
pub fn mle_gbm(series: &TimeSeries) -> Result<GbmEstimate> {
    if series.len() < 3 {
        return Err(invalid_param(format!(
            "{}: calibration needs at least 3 observations, got {}",
            series.name(),
            series.len()
        )));
    }
    let r = log_returns(series)?;
    let dt = series.period();
    let n = r.len();
    let values = r.values();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sigma = (var / dt).sqrt();
    let mu = mean / dt + 0.5 * sigma * sigma;
    let params = GbmParams::new(mu, sigma)?;
    Ok(GbmEstimate {
        params,
        se_mu: sigma / (n as f64 * dt).sqrt(),
        se_sigma: sigma / (2.0 * n as f64).sqrt(),
        n_obs: n,
        dt,
        degenerate: sigma == 0.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub beta: f64,
    pub gdp: GbmEstimate,
    pub money: GbmEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationTable {
    /// (parameter label, estimate, standard error) for one row, in table order.
    fn entries(row: &CalibrationRow) -> [(&'static str, f64, f64); 4] {
        [
            ("mu_X", row.gdp.params.mu, row.gdp.se_mu),
            ("sigma_X", row.gdp.params.sigma, row.gdp.se_sigma),
            ("mu_M", row.money.params.mu, row.money.se_mu),
            ("sigma_M", row.money.params.sigma, row.money.se_sigma),
        ]
    }

    /// `beta,param,estimate,se`
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("beta,param,estimate,se\n");
        for row in &self.rows {
            for (name, est, se) in Self::entries(row) {
                let _ = writeln!(
                    out,
                    "{},{name},{},{}",
                    format_sig12(row.beta),
                    format_sig12(est),
                    format_sig12(se)
                );
            }
        }
        out
    }

    /// Aligned text table: Parameter, Estimated Value, Standard Error, beta.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let rule = "-".repeat(58);
        let _ = writeln!(out, "{rule}");
        let _ = writeln!(
            out,
            "{:<10} {:>16} {:>16} {:>10}",
            "Parameter", "Estimated Value", "Standard Error", "beta"
        );
        for row in &self.rows {
            let _ = writeln!(out, "{rule}");
            for (name, est, se) in Self::entries(row) {
                let _ = writeln!(out, "{name:<10} {est:>16.4} {se:>16.4e} {:>10}", row.beta);
            }
        }
        let _ = writeln!(out, "{rule}");
        out
    }
}

/// One row per inhibition degree, each carrying the GDP and money-supply
/// estimates. The estimates do not depend on beta.
pub fn beta_sweep(
    gdp: &TimeSeries,
    money: &TimeSeries,
    beta_grid: &[f64],
) -> Result<CalibrationTable> {
    if beta_grid.is_empty() {
        return Err(invalid_param("beta grid is empty"));
    }
    if let Some(b) = beta_grid.iter().find(|b| !(**b > 1.5 && b.is_finite())) {
        return Err(invalid_param(format!(
            "inhibition degree must exceed 3/2, got {b}"
        )));
    }
    if beta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid_param("beta grid must be strictly increasing"));
    }
    let gdp_est = mle_gbm(gdp)?;
    let money_est = mle_gbm(money)?;
    if (gdp_est.dt - money_est.dt).abs() > 1e-12 {
        return Err(Error::Mismatch(format!(
            "GDP sampled every {} years, money every {}",
            gdp_est.dt, money_est.dt
        )));
    }
    Ok(CalibrationTable {
        rows: beta_grid
            .iter()
            .map(|beta| CalibrationRow {
                beta: *beta,
                gdp: gdp_est,
                money: money_est,
            })
            .collect(),
    })
}
