//! The ergodic maker operator and the partially ergodic velocity process.
//!
//! A log process is split into a deterministic drift part `D(delta)` and a
//! random part `R(delta)` over an interval of length `delta`. The operator
//! maps it to
//!
//! ```text
//! xi(delta) = 0 * Y(0) + W(T) / T^beta * D(delta) + R(delta) / T^beta
//! ```
//!
//! For a GBM log process `D(delta) = (mu - sigma^2/2) delta` and
//! `R(delta) = sigma W(delta)`. The velocity process is the image of
//! `ln V = ln X - ln M` under a shared driver:
//!
//! ```text
//! Z(delta) = A delta W(T) / T^beta + B W(delta) / T^beta
//! A = (mu_X - mu_M) + (sigma_M^2 - sigma_X^2) / 2,   B = sigma_X - sigma_M
//! ```
//!
//! The delta grid is the driver's time grid.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use crate::error::{invalid_param, Error, Result};
use crate::io::format_sig12;
use crate::stochastic::{GbmParams, WienerPath};
use crate::timeseries::TimeSeries;

/// Inhibition degree used when none is given.
pub const DEFAULT_BETA: f64 = 1.6;

/// Sweep grid 1.6, 1.7, ..., 2.0.
pub fn default_beta_grid() -> Vec<f64> {
    (0..5).map(|i| (16 + i) as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmoConfig {
    beta: f64,
    horizon: f64,
}

impl EmoConfig {
    /// `beta` must exceed 3/2 and `horizon` (years) must be positive.
    pub fn new(beta: f64, horizon: f64) -> Result<Self> {
        if !(beta > 1.5 && beta.is_finite()) {
            return Err(invalid_param(format!(
                "inhibition degree must exceed 3/2, got {beta}"
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid_param(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self { beta, horizon })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// T^beta.
    pub fn damping(&self) -> f64 {
        self.horizon.powf(self.beta)
    }

    fn check_driver(&self, driver: &WienerPath) -> Result<()> {
        let h = driver.horizon();
        if (h - self.horizon).abs() > 1e-12 * self.horizon.max(1.0) {
            return Err(Error::Mismatch(format!(
                "driver horizon {h} differs from operator horizon {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Drift/random split of a log process.
///
/// `D(delta) = drift_slope * delta` and
/// `R_i = diffusion_scale * W(delta_i) + residual_i`, where the optional
/// residual is sampled on the driver grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDecomposition {
    pub drift_slope: f64,
    pub diffusion_scale: f64,
    pub residual: Option<Vec<f64>>,
}

impl LogDecomposition {
    pub fn drift_part(&self, delta: f64) -> f64 {
        self.drift_slope * delta
    }

    /// R at grid index `i` of `driver`.
    pub fn random_part(&self, i: usize, driver: &WienerPath) -> f64 {
        let r = self.diffusion_scale * driver.values()[i];
        match &self.residual {
            Some(res) => r + res[i],
            None => r,
        }
    }

    fn check_grid(&self, driver: &WienerPath) -> Result<()> {
        if let Some(res) = &self.residual {
            if res.len() != driver.values().len() {
                return Err(Error::Mismatch(format!(
                    "residual has {} points, driver grid has {}",
                    res.len(),
                    driver.values().len()
                )));
            }
        }
        Ok(())
    }
}

fn merge_residuals(a: &Option<Vec<f64>>, b: &Option<Vec<f64>>, sb: f64) -> Option<Vec<f64>> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.iter().map(|v| sb * v).collect()),
        (Some(x), Some(y)) => {
            assert_eq!(x.len(), y.len(), "residual grids differ");
            Some(x.iter().zip(y).map(|(u, v)| u + sb * v).collect())
        }
    }
}

impl Add for &LogDecomposition {
    type Output = LogDecomposition;

    fn add(self, rhs: &LogDecomposition) -> LogDecomposition {
        LogDecomposition {
            drift_slope: self.drift_slope + rhs.drift_slope,
            diffusion_scale: self.diffusion_scale + rhs.diffusion_scale,
            residual: merge_residuals(&self.residual, &rhs.residual, 1.0),
        }
    }
}

impl Sub for &LogDecomposition {
    type Output = LogDecomposition;

    fn sub(self, rhs: &LogDecomposition) -> LogDecomposition {
        LogDecomposition {
            drift_slope: self.drift_slope - rhs.drift_slope,
            diffusion_scale: self.diffusion_scale - rhs.diffusion_scale,
            residual: merge_residuals(&self.residual, &rhs.residual, -1.0),
        }
    }
}

impl Mul<&LogDecomposition> for f64 {
    type Output = LogDecomposition;

    fn mul(self, rhs: &LogDecomposition) -> LogDecomposition {
        LogDecomposition {
            drift_slope: self * rhs.drift_slope,
            diffusion_scale: self * rhs.diffusion_scale,
            residual: rhs
                .residual
                .as_ref()
                .map(|r| r.iter().map(|v| self * v).collect()),
        }
    }
}

/// GBM log process: D = (mu - sigma^2/2) delta, R = sigma W(delta).
pub fn decompose_log_gbm(params: GbmParams) -> LogDecomposition {
    LogDecomposition {
        drift_slope: params.log_drift(),
        diffusion_scale: params.sigma,
        residual: None,
    }
}

/// A realization of an operator image, indexed by interval length.
#[derive(Debug, Clone, PartialEq)]
pub struct EmoPath {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub config: EmoConfig,
    /// W(T) of the driver that produced the path.
    pub terminal_w: f64,
    pub seed: u64,
    pub stream: u64,
}

impl EmoPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `delta,value` CSV.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("delta,value\n");
        for (d, v) in self.deltas.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", format_sig12(*d), format_sig12(*v));
        }
        out
    }
}

/// Applies the operator to `decomp` on the grid of `driver`.
pub fn apply_emo(
    decomp: &LogDecomposition,
    config: &EmoConfig,
    driver: &WienerPath,
) -> Result<EmoPath> {
    config.check_driver(driver)?;
    decomp.check_grid(driver)?;
    let damping = config.damping();
    let w_t = driver.terminal();
    let values = driver
        .times()
        .iter()
        .enumerate()
        .map(|(i, delta)| {
            (w_t / damping) * decomp.drift_part(*delta) + decomp.random_part(i, driver) / damping
        })
        .collect();
    Ok(EmoPath {
        deltas: driver.times().to_vec(),
        values,
        config: *config,
        terminal_w: w_t,
        seed: driver.seed(),
        stream: driver.stream(),
    })
}

/// Coefficients (A, B) of the closed-form velocity process.
pub fn z_coefficients(params_x: GbmParams, params_m: GbmParams) -> (f64, f64) {
    let a = (params_x.mu - params_m.mu)
        + 0.5 * (params_m.sigma * params_m.sigma - params_x.sigma * params_x.sigma);
    let b = params_x.sigma - params_m.sigma;
    (a, b)
}

/// Z(delta) = (A delta W(T) + B W(delta)) / T^beta with a shared driver.
pub fn z_velocity_path(
    params_x: GbmParams,
    params_m: GbmParams,
    config: &EmoConfig,
    driver: &WienerPath,
) -> Result<EmoPath> {
    config.check_driver(driver)?;
    let (a, b) = z_coefficients(params_x, params_m);
    let damping = config.damping();
    let w_t = driver.terminal();
    let values = driver
        .times()
        .iter()
        .zip(driver.values())
        .map(|(delta, w)| (a * delta * w_t + b * w) / damping)
        .collect();
    Ok(EmoPath {
        deltas: driver.times().to_vec(),
        values,
        config: *config,
        terminal_w: w_t,
        seed: driver.seed(),
        stream: driver.stream(),
    })
}

/// Var Z(delta) = A^2 delta^2 T^(1-2beta) + B^2 delta T^(-2beta) + 2AB delta^2 T^(-2beta).
pub fn z_variance(params_x: GbmParams, params_m: GbmParams, config: &EmoConfig, delta: f64) -> f64 {
    z_covariance(params_x, params_m, config, delta, delta)
}

/// Cov(Z(s), Z(u)) = (A^2 s u T + 2AB s u + B^2 min(s, u)) / T^(2 beta).
pub fn z_covariance(
    params_x: GbmParams,
    params_m: GbmParams,
    config: &EmoConfig,
    s: f64,
    u: f64,
) -> f64 {
    let (a, b) = z_coefficients(params_x, params_m);
    let t = config.horizon;
    (a * a * s * u * t + 2.0 * a * b * s * u + b * b * s.min(u)) / t.powf(2.0 * config.beta)
}

/// Operator image of an observed log-return series.
///
/// The drift slope is the mean return per year and the random part is the
/// cumulative demeaned return, so `R` starts and ends at zero. The driver
/// must have one step per return; the result has `returns.len() + 1` points
/// starting at `delta = 0`.
pub fn z_from_data(
    log_returns: &TimeSeries,
    config: &EmoConfig,
    driver: &WienerPath,
) -> Result<EmoPath> {
    if log_returns.is_empty() {
        return Err(Error::InvalidSeries("return series is empty".into()));
    }
    if driver.n_steps() != log_returns.len() {
        return Err(Error::Mismatch(format!(
            "driver has {} steps for {} returns",
            driver.n_steps(),
            log_returns.len()
        )));
    }
    let dt = log_returns.period();
    if (driver.dt() - dt).abs() > 1e-9 * dt {
        return Err(Error::Mismatch(format!(
            "driver step {} differs from sampling period {dt}",
            driver.dt()
        )));
    }
    let r = log_returns.values();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let mut residual = Vec::with_capacity(r.len() + 1);
    let mut acc = 0.0;
    residual.push(0.0);
    for x in r {
        acc += x - mean;
        residual.push(acc);
    }
    let decomp = LogDecomposition {
        drift_slope: mean / dt,
        diffusion_scale: 0.0,
        residual: Some(residual),
    };
    apply_emo(&decomp, config, driver)
}
