//! Ensemble diagnostics: the mean-ergodicity functional
//! `(1/T) * integral_0^T (1 - tau/T) Cov(tau) dtau`, a Dickey-Fuller style
//! mean-reversion regression and a first-visit dispersion summary.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::emo::EmoPath;
use crate::error::{invalid_param, Error, Result};

/// Paths per work unit; partial sums are reduced in chunk order so results
/// do not depend on the thread count.
const CHUNK: usize = 64;

/// Default threshold below which the final statistic counts as vanished.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// Realizations sharing one uniform grid, stored path-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    grid: Vec<f64>,
    data: Vec<f64>,
    count: usize,
}

impl Ensemble {
    pub fn new(grid: Vec<f64>, paths: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(invalid_param("ensemble grid needs at least two points"));
        }
        let step = grid[1] - grid[0];
        if !(step > 0.0) {
            return Err(invalid_param("ensemble grid must be increasing"));
        }
        for (i, w) in grid.windows(2).enumerate() {
            if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
                return Err(invalid_param(format!(
                    "ensemble grid is not uniform at index {i}"
                )));
            }
        }
        if paths.is_empty() {
            return Err(invalid_param("ensemble has no paths"));
        }
        let mut data = Vec::with_capacity(paths.len() * grid.len());
        for (k, p) in paths.iter().enumerate() {
            if p.len() != grid.len() {
                return Err(Error::Mismatch(format!(
                    "path {k} has {} points, grid has {}",
                    p.len(),
                    grid.len()
                )));
            }
            data.extend_from_slice(p);
        }
        Ok(Self {
            count: paths.len(),
            grid,
            data,
        })
    }

    pub fn from_emo_paths(paths: &[EmoPath]) -> Result<Self> {
        let first = paths
            .first()
            .ok_or_else(|| invalid_param("ensemble has no paths"))?;
        for p in paths {
            if p.deltas != first.deltas {
                return Err(Error::Mismatch("operator paths use different grids".into()));
            }
        }
        Self::new(
            first.deltas.clone(),
            paths.iter().map(|p| p.values.clone()).collect(),
        )
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn points(&self) -> usize {
        self.grid.len()
    }

    pub fn path(&self, k: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.grid.len())
    }

    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Ensemble mean at every grid point.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.points();
        let mut acc = vec![0.0; n];
        for p in self.paths() {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= self.count as f64);
        acc
    }

    /// Unbiased ensemble variance at every grid point.
    pub fn variance(&self) -> Result<Vec<f64>> {
        self.require_pairs()?;
        let mean = self.mean();
        let mut acc = vec![0.0; self.points()];
        for p in self.paths() {
            for ((a, v), m) in acc.iter_mut().zip(p).zip(&mean) {
                *a += (v - m) * (v - m);
            }
        }
        acc.iter_mut().for_each(|a| *a /= (self.count - 1) as f64);
        Ok(acc)
    }

    /// The ensemble restricted to the first `points` grid points.
    pub fn truncated(&self, points: usize) -> Result<Self> {
        if points < 2 || points > self.points() {
            return Err(invalid_param(format!(
                "cannot keep {points} of {} grid points",
                self.points()
            )));
        }
        Self::new(
            self.grid[..points].to_vec(),
            self.paths().map(|p| p[..points].to_vec()).collect(),
        )
    }

    fn require_pairs(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Degenerate(
                "covariance needs at least two paths".into(),
            ));
        }
        Ok(())
    }
}

/// Reading of `Cov_yy(tau)` used by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovEstimator {
    /// Ensemble covariance of (Y_s, Y_{s+tau}) averaged over admissible s.
    #[default]
    Stationarized,
    /// Ensemble variance of Y_tau.
    Variance,
}

impl std::str::FromStr for CovEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "stationarized" => Ok(CovEstimator::Stationarized),
            "variance" => Ok(CovEstimator::Variance),
            other => Err(invalid_param(format!(
                "covariance estimator {other:?}; expected stationarized or variance"
            ))),
        }
    }
}

/// Covariance estimate at a lag of `lag` grid steps.
pub fn autocovariance(ensemble: &Ensemble, lag: usize, estimator: CovEstimator) -> Result<f64> {
    ensemble.require_pairs()?;
    let n = ensemble.points();
    if lag >= n {
        return Err(invalid_param(format!("lag {lag} outside a {n}-point grid")));
    }
    let mean = ensemble.mean();
    let denom = (ensemble.count - 1) as f64;
    match estimator {
        CovEstimator::Variance => {
            let ss: f64 = ensemble.paths().map(|p| (p[lag] - mean[lag]).powi(2)).sum();
            Ok(ss / denom)
        }
        CovEstimator::Stationarized => {
            let windows = n - lag;
            let mut total = 0.0;
            for p in ensemble.paths() {
                for s in 0..windows {
                    total += (p[s] - mean[s]) * (p[s + lag] - mean[s + lag]);
                }
            }
            Ok(total / (denom * windows as f64))
        }
    }
}

fn lagged_products(
    centered: &[f64],
    fft: &Arc<dyn Fft<f64>>,
    ifft: &Arc<dyn Fft<f64>>,
    out: &mut [f64],
) {
    let m = fft.len();
    let mut buf: Vec<Complex<f64>> = centered
        .iter()
        .map(|v| Complex::new(*v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    fft.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    ifft.process(&mut buf);
    let scale = 1.0 / m as f64;
    for (o, c) in out.iter_mut().zip(&buf) {
        *o += c.re * scale;
    }
}

/// Covariance estimates for every lag `0..points`.
pub fn autocovariance_curve(ensemble: &Ensemble, estimator: CovEstimator) -> Result<Vec<f64>> {
    ensemble.require_pairs()?;
    let n = ensemble.points();
    let denom = (ensemble.count - 1) as f64;
    let mean = ensemble.mean();
    match estimator {
        CovEstimator::Variance => ensemble.variance(),
        CovEstimator::Stationarized => {
            let m = (2 * n).next_power_of_two();
            let mut planner = FftPlanner::<f64>::new();
            let fft = planner.plan_fft_forward(m);
            let ifft = planner.plan_fft_inverse(m);
            let paths: Vec<&[f64]> = ensemble.paths().collect();
            let partials: Vec<Vec<f64>> = paths
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut acc = vec![0.0; n];
                    let mut centered = vec![0.0; n];
                    for p in chunk {
                        for ((c, v), mu) in centered.iter_mut().zip(*p).zip(&mean) {
                            *c = v - mu;
                        }
                        lagged_products(&centered, &fft, &ifft, &mut acc);
                    }
                    acc
                })
                .collect();
            let mut total = vec![0.0; n];
            for part in &partials {
                for (t, v) in total.iter_mut().zip(part) {
                    *t += v;
                }
            }
            Ok(total
                .iter()
                .enumerate()
                .map(|(lag, s)| s / (denom * (n - lag) as f64))
                .collect())
        }
    }
}

/// Index of the grid point equal to `horizon`.
fn horizon_index(grid: &[f64], horizon: f64) -> Result<usize> {
    let tol = 1e-9 * horizon.abs().max(1.0);
    grid.iter()
        .position(|t| (t - horizon).abs() <= tol)
        .ok_or_else(|| {
            Error::Mismatch(format!(
                "grid [{}, {}] has no point at horizon {horizon}",
                grid[0],
                grid[grid.len() - 1]
            ))
        })
}

/// Trapezoidal `(1/T) * integral_0^T (1 - tau/T) Cov(tau) dtau` over the
/// grid restricted to `[0, T]`.
pub fn mean_ergodicity_statistic(
    ensemble: &Ensemble,
    horizon: f64,
    estimator: CovEstimator,
) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(invalid_param(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if ensemble.grid[0].abs() > 1e-12 {
        return Err(Error::Mismatch(format!(
            "grid must start at 0, starts at {}",
            ensemble.grid[0]
        )));
    }
    let k = horizon_index(&ensemble.grid, horizon)?;
    let view;
    let ens = if k + 1 == ensemble.points() {
        ensemble
    } else {
        view = ensemble.truncated(k + 1)?;
        &view
    };
    let cov = autocovariance_curve(ens, estimator)?;
    let integrand: Vec<f64> = ens
        .grid
        .iter()
        .zip(&cov)
        .map(|(tau, c)| (1.0 - tau / horizon) * c)
        .collect();
    let integral: f64 = ens
        .grid
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum();
    Ok(integral / horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    MeanErgodic,
    Inconclusive,
    NotMeanErgodic,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::MeanErgodic => "MeanErgodic",
            Verdict::Inconclusive => "Inconclusive",
            Verdict::NotMeanErgodic => "NotMeanErgodic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    pub statistic_by_horizon: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub note: String,
}

/// MeanErgodic when |statistic| strictly decreases over increasing horizons
/// and ends below `tolerance`; NotMeanErgodic when it strictly increases.
pub fn assess_mean_ergodicity(
    statistics: &[(f64, f64)],
    tolerance: f64,
) -> Result<ErgodicityReport> {
    if statistics.len() < 3 {
        return Err(invalid_param(format!(
            "need at least 3 horizons, got {}",
            statistics.len()
        )));
    }
    if statistics.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid_param("horizons must be strictly increasing"));
    }
    if statistics.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite statistic".into()));
    }
    let mags: Vec<f64> = statistics.iter().map(|(_, v)| v.abs()).collect();
    let decreasing = mags.windows(2).all(|w| w[1] < w[0]);
    let increasing = mags.windows(2).all(|w| w[1] > w[0]);
    let last = mags[mags.len() - 1];
    let (verdict, note) = if decreasing && last < tolerance {
        (
            Verdict::MeanErgodic,
            format!("decreasing; final {last:e} < {tolerance:e}"),
        )
    } else if increasing {
        (
            Verdict::NotMeanErgodic,
            "statistic grows with the horizon".to_string(),
        )
    } else if decreasing {
        (
            Verdict::Inconclusive,
            format!("decreasing but final {last:e} >= {tolerance:e}"),
        )
    } else {
        (
            Verdict::Inconclusive,
            "statistic is not monotone in the horizon".to_string(),
        )
    };
    Ok(ErgodicityReport {
        statistic_by_horizon: statistics.to_vec(),
        verdict,
        tolerance,
        note,
    })
}

// MacKinnon (1994) response surface for the constant-only Dickey-Fuller
// t statistic, one I(1) series.
const DF_TAU_MAX: f64 = 2.74;
const DF_TAU_MIN: f64 = -18.83;
const DF_TAU_STAR: f64 = -1.61;
const DF_SMALL_P: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const DF_LARGE_P: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

/// Approximate left-tail p-value of a Dickey-Fuller t statistic (regression with constant).
pub fn dickey_fuller_p_value(t_stat: f64) -> f64 {
    if t_stat.is_nan() {
        return f64::NAN;
    }
    if t_stat > DF_TAU_MAX {
        return 1.0;
    }
    if t_stat < DF_TAU_MIN {
        return 0.0;
    }
    let coef: &[f64] = if t_stat <= DF_TAU_STAR {
        &DF_SMALL_P
    } else {
        &DF_LARGE_P
    };
    let z = coef.iter().rev().fold(0.0, |acc, c| acc * t_stat + c);
    Normal::standard().cdf(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanReversion {
    /// Coefficient of the demeaned level in the increment regression.
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub reverting: bool,
    pub n: usize,
}

/// Minimum path length accepted by [`mean_reversion_test`].
pub const MIN_REVERSION_LEN: usize = 30;

/// Regresses `y[i+1] - y[i]` on `y[i] - mean(y)` with an intercept.
///
/// The slope's t statistic is referred to the Dickey-Fuller distribution,
/// since under the no-reversion null the regressor is a random walk.
/// `reverting` is `slope < 0 && p < 0.05`.
pub fn mean_reversion_test(path: &[f64]) -> Result<MeanReversion> {
    let n = path.len();
    if n < MIN_REVERSION_LEN {
        return Err(invalid_param(format!(
            "mean-reversion test needs at least {MIN_REVERSION_LEN} points, got {n}"
        )));
    }
    if path.iter().any(|v| !v.is_finite()) {
        return Err(invalid_param("path contains non-finite values"));
    }
    let level_mean = path.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = path[..n - 1].iter().map(|v| v - level_mean).collect();
    let y: Vec<f64> = path.windows(2).map(|w| w[1] - w[0]).collect();
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let scale = path.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if sxx <= (1e-14 * scale).powi(2) * m {
        return Err(Error::Degenerate("path has no level variation".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let std_error = (ssr / (m - 2.0) / sxx).sqrt();
    let t_stat = if std_error > 0.0 {
        slope / std_error
    } else if slope < 0.0 {
        f64::NEG_INFINITY
    } else if slope > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let p_value = dickey_fuller_p_value(t_stat);
    Ok(MeanReversion {
        slope,
        intercept,
        std_error,
        t_stat,
        p_value,
        reverting: slope < 0.0 && p_value < 0.05,
        n,
    })
}

/// Half-open value interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
}

impl Cell {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(invalid_param(format!("empty cell [{lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v < self.hi
    }

    fn overlaps(&self, other: &Cell) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSummary {
    /// Paths that enter the source cell at some grid point.
    pub entered_source: usize,
    /// Of those, paths that visit the target cell afterwards.
    pub reached_target: usize,
    pub fraction: f64,
    /// Median lag between first entry into the source cell and the first
    /// later visit to the target cell.
    pub median_first_visit: Option<f64>,
    /// Set when a cell lies outside the observed value range.
    pub outside_range: bool,
}

/// For each path, takes its first entry into `source` and looks for a later
/// visit to `target`.
pub fn dispersion_diagnostic(
    ensemble: &Ensemble,
    source: Cell,
    target: Cell,
) -> Result<DispersionSummary> {
    if source.overlaps(&target) {
        return Err(invalid_param("cells must be disjoint"));
    }
    let (lo, hi) = ensemble
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    let touches = |c: &Cell| c.lo <= hi && c.hi > lo;
    let outside_range = !(touches(&source) && touches(&target));

    let mut entered = 0;
    let mut lags = Vec::new();
    for p in ensemble.paths() {
        let Some(i) = p.iter().position(|v| source.contains(*v)) else {
            continue;
        };
        entered += 1;
        if let Some(j) = p[i + 1..].iter().position(|v| target.contains(*v)) {
            lags.push(ensemble.grid[i + 1 + j] - ensemble.grid[i]);
        }
    }
    lags.sort_by(f64::total_cmp);
    let median_first_visit = match lags.len() {
        0 => None,
        l if l % 2 == 1 => Some(lags[l / 2]),
        l => Some(0.5 * (lags[l / 2 - 1] + lags[l / 2])),
    };
    let fraction = if entered == 0 {
        0.0
    } else {
        lags.len() as f64 / entered as f64
    };
    Ok(DispersionSummary {
        entered_source: entered,
        reached_target: lags.len(),
        fraction,
        median_first_visit,
        outside_range,
    })
}
