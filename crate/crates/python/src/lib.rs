//! Python bindings: `import velergo`.
//!
//! Series cross the boundary as `Series` objects (ISO date strings plus
//! floats); simulations release the GIL while they run.

use chrono::NaiveDate;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

use velergo::ergodicity::MeanReversion as CoreMeanReversion;
use velergo::evaluate::MetricsReport;
use velergo::forecast::ForecastFan;
use velergo::stochastic::WienerPath;
use velergo::{
    Aggregation, CovEstimator, DriverMode, EmoConfig, Error, GbmEstimate, GbmParams, TimeSeries,
};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::Degenerate(_) => PyArithmeticError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_date(s: &str) -> PyResult<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| PyValueError::new_err(format!("expected YYYY-MM-DD, got {s:?}")))
}

fn gbm(mu: f64, sigma: f64) -> PyResult<GbmParams> {
    GbmParams::new(mu, sigma).map_err(to_py)
}

/// A dated series on a uniform calendar grid.
#[pyclass(frozen, skip_from_py_object, module = "velergo")]
#[derive(Clone)]
pub struct Series {
    inner: TimeSeries,
}

#[pymethods]
impl Series {
    #[new]
    #[pyo3(signature = (name, dates, values, period = 0.25, levels = true))]
    fn new(
        name: &str,
        dates: Vec<String>,
        values: Vec<f64>,
        period: f64,
        levels: bool,
    ) -> PyResult<Self> {
        let dates = dates
            .iter()
            .map(|d| parse_date(d))
            .collect::<PyResult<Vec<_>>>()?;
        let kind = if levels {
            velergo::SeriesKind::Level
        } else {
            velergo::SeriesKind::Returns
        };
        let inner = TimeSeries::new(name, dates, values, period, kind).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates().iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Series({:?}, {} points, {} to {})",
            self.inner.name(),
            self.inner.len(),
            self.inner.first_date(),
            self.inner.last_date()
        )
    }
}

/// Parses FRED `DATE,VALUE` text.
#[pyfunction]
fn parse_series_csv(text: &str) -> PyResult<Series> {
    Ok(Series {
        inner: velergo::parse_series_csv(text).map_err(to_py)?,
    })
}

#[pyfunction]
fn read_series_csv(path: &str) -> PyResult<Series> {
    Ok(Series {
        inner: velergo::read_series_csv(path).map_err(to_py)?,
    })
}

/// Aggregates to a coarser period; `how` is "mean" or "last".
#[pyfunction]
#[pyo3(signature = (series, period = 0.25, how = "mean"))]
fn downsample(series: &Series, period: f64, how: &str) -> PyResult<Series> {
    let how: Aggregation = how.parse().map_err(to_py)?;
    Ok(Series {
        inner: velergo::downsample(&series.inner, period, how).map_err(to_py)?,
    })
}

/// GDP / money on dates present in both (within 15 days).
#[pyfunction]
fn velocity(gdp: &Series, money: &Series) -> PyResult<Series> {
    let v = velergo::velocity_from(&gdp.inner, &money.inner).map_err(to_py)?;
    Ok(Series {
        inner: v.into_series(),
    })
}

#[pyfunction]
fn log_returns(series: &Series) -> PyResult<Series> {
    Ok(Series {
        inner: velergo::log_returns(&series.inner).map_err(to_py)?,
    })
}

/// (before, from) around `boundary`.
#[pyfunction]
fn split_at(series: &Series, boundary: &str) -> PyResult<(Series, Series)> {
    let (a, b) = velergo::split_at(&series.inner, parse_date(boundary)?).map_err(to_py)?;
    Ok((Series { inner: a }, Series { inner: b }))
}

#[pyclass(frozen, module = "velergo", name = "GbmEstimate")]
pub struct PyGbmEstimate {
    #[pyo3(get)]
    mu: f64,
    #[pyo3(get)]
    sigma: f64,
    #[pyo3(get)]
    se_mu: f64,
    #[pyo3(get)]
    se_sigma: f64,
    #[pyo3(get)]
    n_obs: usize,
    #[pyo3(get)]
    dt: f64,
    #[pyo3(get)]
    degenerate: bool,
}

impl From<GbmEstimate> for PyGbmEstimate {
    fn from(e: GbmEstimate) -> Self {
        Self {
            mu: e.params.mu,
            sigma: e.params.sigma,
            se_mu: e.se_mu,
            se_sigma: e.se_sigma,
            n_obs: e.n_obs,
            dt: e.dt,
            degenerate: e.degenerate,
        }
    }
}

#[pymethods]
impl PyGbmEstimate {
    fn __repr__(&self) -> String {
        format!(
            "GbmEstimate(mu={} ± {}, sigma={} ± {}, n_obs={})",
            self.mu, self.se_mu, self.sigma, self.se_sigma, self.n_obs
        )
    }
}

/// Maximum-likelihood GBM fit of a level series.
#[pyfunction]
fn mle_gbm(series: &Series) -> PyResult<PyGbmEstimate> {
    Ok(velergo::mle_gbm(&series.inner).map_err(to_py)?.into())
}

/// One operator image of log-velocity: returns (deltas, values).
#[pyfunction]
#[pyo3(signature = (mu_x, sigma_x, mu_m, sigma_m, beta, horizon, n_steps, seed = 0, stream = 0))]
#[allow(clippy::too_many_arguments)]
fn z_velocity_path(
    mu_x: f64,
    sigma_x: f64,
    mu_m: f64,
    sigma_m: f64,
    beta: f64,
    horizon: f64,
    n_steps: usize,
    seed: u64,
    stream: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = EmoConfig::new(beta, horizon).map_err(to_py)?;
    let w = WienerPath::generate(horizon, n_steps, seed, stream).map_err(to_py)?;
    let z = velergo::z_velocity_path(gbm(mu_x, sigma_x)?, gbm(mu_m, sigma_m)?, &cfg, &w)
        .map_err(to_py)?;
    Ok((z.deltas, z.values))
}

/// Closed-form Var Z(delta).
#[pyfunction]
fn z_variance(
    mu_x: f64,
    sigma_x: f64,
    mu_m: f64,
    sigma_m: f64,
    beta: f64,
    horizon: f64,
    delta: f64,
) -> PyResult<f64> {
    let cfg = EmoConfig::new(beta, horizon).map_err(to_py)?;
    Ok(velergo::emo::z_variance(
        gbm(mu_x, sigma_x)?,
        gbm(mu_m, sigma_m)?,
        &cfg,
        delta,
    ))
}

/// Mean-ergodicity statistic of a simulated operator ensemble over [0, horizon].
#[pyfunction]
#[pyo3(signature = (mu_x, sigma_x, mu_m, sigma_m, beta, horizon, n_steps, n_paths, seed = 0, estimator = "stationarized"))]
#[allow(clippy::too_many_arguments)]
fn z_statistic(
    py: Python<'_>,
    mu_x: f64,
    sigma_x: f64,
    mu_m: f64,
    sigma_m: f64,
    beta: f64,
    horizon: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    estimator: &str,
) -> PyResult<f64> {
    let est: CovEstimator = estimator.parse().map_err(to_py)?;
    let cfg = EmoConfig::new(beta, horizon).map_err(to_py)?;
    let (px, pm) = (gbm(mu_x, sigma_x)?, gbm(mu_m, sigma_m)?);
    py.detach(|| {
        let ens = velergo::simulate_z_ensemble(px, pm, &cfg, n_steps, n_paths, seed)?;
        velergo::mean_ergodicity_statistic(&ens, horizon, est)
    })
    .map_err(to_py)
}

#[pyclass(frozen, module = "velergo")]
pub struct MeanReversion {
    #[pyo3(get)]
    slope: f64,
    #[pyo3(get)]
    intercept: f64,
    #[pyo3(get)]
    std_error: f64,
    #[pyo3(get)]
    t_stat: f64,
    #[pyo3(get)]
    p_value: f64,
    #[pyo3(get)]
    reverting: bool,
    #[pyo3(get)]
    n: usize,
}

impl From<CoreMeanReversion> for MeanReversion {
    fn from(m: CoreMeanReversion) -> Self {
        Self {
            slope: m.slope,
            intercept: m.intercept,
            std_error: m.std_error,
            t_stat: m.t_stat,
            p_value: m.p_value,
            reverting: m.reverting,
            n: m.n,
        }
    }
}

#[pymethods]
impl MeanReversion {
    fn __repr__(&self) -> String {
        format!(
            "MeanReversion(slope={}, t_stat={}, p_value={}, reverting={})",
            self.slope, self.t_stat, self.p_value, self.reverting
        )
    }
}

/// Regression of increments on demeaned levels with Dickey-Fuller p-values.
#[pyfunction]
fn mean_reversion_test(path: Vec<f64>) -> PyResult<MeanReversion> {
    Ok(velergo::mean_reversion_test(&path).map_err(to_py)?.into())
}

#[pyclass(frozen, module = "velergo")]
pub struct Fan {
    inner: ForecastFan,
}

#[pymethods]
impl Fan {
    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates.iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean_path.clone()
    }

    #[getter]
    fn quantile_levels(&self) -> Vec<f64> {
        self.inner.quantile_levels.clone()
    }

    /// One list per quantile level.
    #[getter]
    fn quantiles(&self) -> Vec<Vec<f64>> {
        self.inner.quantiles.clone()
    }

    #[getter]
    fn n_paths(&self) -> usize {
        self.inner.n_paths
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }
}

/// Monte Carlo velocity fan from `v0` at `start`.
#[pyfunction]
#[pyo3(signature = (v0, mu_x, sigma_x, mu_m, sigma_m, horizon = 5.0, n_paths = 10_000, seed = 0, start = "2024-01-01", driver_mode = "shared"))]
#[allow(clippy::too_many_arguments)]
fn forecast_velocity(
    py: Python<'_>,
    v0: f64,
    mu_x: f64,
    sigma_x: f64,
    mu_m: f64,
    sigma_m: f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    start: &str,
    driver_mode: &str,
) -> PyResult<Fan> {
    let mode: DriverMode = driver_mode.parse().map_err(to_py)?;
    let opts = velergo::ForecastOptions {
        start: parse_date(start)?,
        horizon,
        n_paths,
        seed,
        driver_mode: mode,
        ..Default::default()
    };
    let (px, pm) = (gbm(mu_x, sigma_x)?, gbm(mu_m, sigma_m)?);
    let inner = py
        .detach(|| velergo::forecast_velocity(v0, px, pm, &opts))
        .map_err(to_py)?;
    Ok(Fan { inner })
}

#[pyclass(frozen, module = "velergo")]
pub struct Metrics {
    #[pyo3(get)]
    sse: f64,
    #[pyo3(get)]
    r2: f64,
    #[pyo3(get)]
    adj_r2: f64,
    #[pyo3(get)]
    rmse: f64,
    #[pyo3(get)]
    mae: f64,
    #[pyo3(get)]
    n: usize,
    #[pyo3(get)]
    k: usize,
}

impl From<MetricsReport> for Metrics {
    fn from(m: MetricsReport) -> Self {
        Self {
            sse: m.sse,
            r2: m.r2,
            adj_r2: m.adj_r2,
            rmse: m.rmse,
            mae: m.mae,
            n: m.n,
            k: m.k,
        }
    }
}

#[pymethods]
impl Metrics {
    fn __repr__(&self) -> String {
        format!(
            "Metrics(sse={}, r2={}, rmse={}, mae={}, n={})",
            self.sse, self.r2, self.rmse, self.mae, self.n
        )
    }
}

#[pyfunction]
#[pyo3(signature = (predicted, actual, k = 1))]
fn compute_metrics(predicted: Vec<f64>, actual: Vec<f64>, k: usize) -> PyResult<Metrics> {
    Ok(velergo::compute_metrics(&predicted, &actual, k)
        .map_err(to_py)?
        .into())
}

#[pymodule]
#[pyo3(name = "velergo")]
fn velergo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Series>()?;
    m.add_class::<PyGbmEstimate>()?;
    m.add_class::<MeanReversion>()?;
    m.add_class::<Fan>()?;
    m.add_class::<Metrics>()?;
    m.add_function(wrap_pyfunction!(parse_series_csv, m)?)?;
    m.add_function(wrap_pyfunction!(read_series_csv, m)?)?;
    m.add_function(wrap_pyfunction!(downsample, m)?)?;
    m.add_function(wrap_pyfunction!(velocity, m)?)?;
    m.add_function(wrap_pyfunction!(log_returns, m)?)?;
    m.add_function(wrap_pyfunction!(split_at, m)?)?;
    m.add_function(wrap_pyfunction!(mle_gbm, m)?)?;
    m.add_function(wrap_pyfunction!(z_velocity_path, m)?)?;
    m.add_function(wrap_pyfunction!(z_variance, m)?)?;
    m.add_function(wrap_pyfunction!(z_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(mean_reversion_test, m)?)?;
    m.add_function(wrap_pyfunction!(forecast_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    Ok(())
}
