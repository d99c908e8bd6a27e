//! Velocity of money as a partially ergodic process.
//!
//! GDP and money supply are modelled as geometric Brownian motions,
//! calibrated by maximum likelihood. The ergodic maker operator turns
//! log-velocity into a zero-mean, mean-ergodic process whose ensemble
//! properties are checked statistically. Velocity forecasts come from
//! Monte Carlo simulation of the GBM ratio and are benchmarked against the
//! constant-velocity quantity-theory baseline.

// `!(x > 0.0)` style guards deliberately reject NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod emo;
pub mod ergodicity;
pub mod error;
pub mod evaluate;
pub mod forecast;
pub mod io;
pub mod stochastic;
pub mod timeseries;

pub use calibration::{beta_sweep, mle_gbm, CalibrationRow, CalibrationTable, GbmEstimate};
pub use emo::{
    apply_emo, decompose_log_gbm, z_from_data, z_velocity_path, EmoConfig, EmoPath,
    LogDecomposition,
};
pub use ergodicity::{
    assess_mean_ergodicity, autocovariance, dispersion_diagnostic, mean_ergodicity_statistic,
    mean_reversion_test, CovEstimator, Ensemble, ErgodicityReport, Verdict,
};
pub use error::{Error, Result};
pub use evaluate::{
    compare_models, compute_metrics, log_ergodic_predictor, qtm_baseline, ComparisonTable,
    EvaluationSpace, MetricsReport, Model, Predictor,
};
pub use forecast::{forecast_velocity, simulate_z_ensemble, ForecastFan, ForecastOptions};
pub use stochastic::{
    gbm_euler_path, gbm_exact_path, wiener_path, DriverMode, GbmParams, Path, WienerPath,
};
pub use timeseries::{
    downsample, log_returns, parse_series_csv, read_series_csv, split_at, velocity_from,
    Aggregation, SeriesKind, TimeSeries, VelocitySeries,
};
