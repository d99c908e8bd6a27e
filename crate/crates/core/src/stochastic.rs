//! Brownian drivers and geometric Brownian motion paths.
//!
//! Every random draw comes from a ChaCha8 generator addressed by
//! `(seed, stream)`. Ensemble member `k` always reads stream `k`, so a path
//! is reproducible on its own, independent of ensemble size or of how many
//! threads generated the ensemble.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid_param, Error, Result};
use crate::io::format_sig12;

/// Drift and volatility of dX = mu X dt + sigma X dW, both per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    pub mu: f64,
    pub sigma: f64,
}

impl GbmParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() {
            return Err(invalid_param(format!(
                "GBM parameters must be finite (mu={mu}, sigma={sigma})"
            )));
        }
        if sigma < 0.0 {
            return Err(invalid_param(format!(
                "volatility must be non-negative, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    /// Drift of ln X: mu - sigma^2 / 2.
    pub fn log_drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }
}

/// How the GDP and money-supply processes share randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriverMode {
    /// One Brownian motion drives both processes.
    Shared,
    Independent,
    /// Brownian motions with instantaneous correlation `rho`.
    Correlated(f64),
}

impl DriverMode {
    pub fn correlation(&self) -> f64 {
        match self {
            DriverMode::Shared => 1.0,
            DriverMode::Independent => 0.0,
            DriverMode::Correlated(rho) => *rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DriverMode::Correlated(rho) if !(-1.0..=1.0).contains(rho) => Err(invalid_param(
                format!("correlation must lie in [-1, 1], got {rho}"),
            )),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for DriverMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DriverMode::Shared => f.write_str("shared"),
            DriverMode::Independent => f.write_str("independent"),
            DriverMode::Correlated(rho) => write!(f, "correlated:{rho}"),
        }
    }
}

impl std::str::FromStr for DriverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "shared" => Ok(DriverMode::Shared),
            "independent" => Ok(DriverMode::Independent),
            _ => {
                let rho = s
                    .strip_prefix("correlated:")
                    .and_then(|r| r.trim().parse::<f64>().ok())
                    .ok_or_else(|| {
                        invalid_param(format!(
                            "driver mode {s:?}; expected shared, independent or correlated:<rho>"
                        ))
                    })?;
                let mode = DriverMode::Correlated(rho);
                mode.validate()?;
                Ok(mode)
            }
        }
    }
}

/// Generator for substream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id of component `component` (0 = primary driver) of ensemble member `member`.
pub fn substream(member: u64, component: u8) -> u64 {
    debug_assert!(member < 1 << 56);
    member | (u64::from(component) << 56)
}

fn uniform_grid(horizon: f64, n_steps: usize) -> Vec<f64> {
    let dt = horizon / n_steps as f64;
    (0..=n_steps)
        .map(|i| if i == n_steps { horizon } else { i as f64 * dt })
        .collect()
}

/// A sampled standard Brownian motion on a uniform grid over `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    times: Vec<f64>,
    values: Vec<f64>,
    seed: u64,
    stream: u64,
}

impl WienerPath {
    /// Draws `n_steps` Gaussian increments of variance `horizon / n_steps`.
    pub fn generate(horizon: f64, n_steps: usize, seed: u64, stream: u64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid_param(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n_steps == 0 {
            return Err(invalid_param("a Wiener path needs at least one step"));
        }
        let times = uniform_grid(horizon, n_steps);
        let sd = (horizon / n_steps as f64).sqrt();
        let mut rng = rng_for(seed, stream);
        let mut values = Vec::with_capacity(n_steps + 1);
        let mut w = 0.0;
        values.push(w);
        for _ in 0..n_steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            w += sd * z;
            values.push(w);
        }
        Ok(Self {
            times,
            values,
            seed,
            stream,
        })
    }

    /// Wraps given Brownian values on the uniform grid of `[0, horizon]`.
    /// Used for hand-specified drivers; `values[0]` must be 0.
    pub fn from_values(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid_param("a Wiener path needs at least two points"));
        }
        if values[0] != 0.0 {
            return Err(invalid_param(format!("W(0) must be 0, got {}", values[0])));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid_param(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid_param("Wiener values must be finite"));
        }
        Ok(Self {
            times: uniform_grid(horizon, values.len() - 1),
            values,
            seed: 0,
            stream: 0,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn dt(&self) -> f64 {
        self.horizon() / self.n_steps() as f64
    }

    /// W(T).
    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Every `stride`-th point of the path.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.n_steps().is_multiple_of(stride) {
            return Err(invalid_param(format!(
                "stride {stride} does not divide {} steps",
                self.n_steps()
            )));
        }
        Ok(Self {
            times: self.times.iter().step_by(stride).copied().collect(),
            values: self.values.iter().step_by(stride).copied().collect(),
            seed: self.seed,
            stream: self.stream,
        })
    }

    /// rho * self + sqrt(1 - rho^2) * other, pointwise.
    fn mixed_with(&self, other: &WienerPath, rho: f64) -> WienerPath {
        let c = (1.0 - rho * rho).max(0.0).sqrt();
        WienerPath {
            times: self.times.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| rho * a + c * b)
                .collect(),
            seed: self.seed,
            stream: self.stream,
        }
    }
}

/// Single Brownian path from stream 0 of `seed`.
pub fn wiener_path(horizon: f64, n_steps: usize, seed: u64) -> Result<WienerPath> {
    WienerPath::generate(horizon, n_steps, seed, 0)
}

/// Drivers (W_X, W_M) for ensemble member `member` under `mode`.
pub fn driver_pair(
    horizon: f64,
    n_steps: usize,
    seed: u64,
    member: u64,
    mode: DriverMode,
) -> Result<(WienerPath, WienerPath)> {
    mode.validate()?;
    let wx = WienerPath::generate(horizon, n_steps, seed, substream(member, 0))?;
    let wm = match mode {
        DriverMode::Shared => wx.clone(),
        DriverMode::Independent => {
            WienerPath::generate(horizon, n_steps, seed, substream(member, 1))?
        }
        DriverMode::Correlated(rho) => {
            let indep = WienerPath::generate(horizon, n_steps, seed, substream(member, 1))?;
            wx.mixed_with(&indep, rho)
        }
    };
    Ok((wx, wm))
}

/// A realized process on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub params: GbmParams,
    pub initial: f64,
}

fn check_level(x0: f64) -> Result<()> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(invalid_param(format!(
            "initial level must be positive, got {x0}"
        )));
    }
    Ok(())
}

/// X_t = x0 exp((mu - sigma^2/2) t + sigma W_t) evaluated on the driver grid.
pub fn gbm_exact_path(params: GbmParams, x0: f64, w: &WienerPath) -> Result<Path> {
    check_level(x0)?;
    let drift = params.log_drift();
    let values = w
        .times
        .iter()
        .zip(&w.values)
        .map(|(t, wt)| x0 * (drift * t + params.sigma * wt).exp())
        .collect();
    Ok(Path {
        times: w.times.clone(),
        values,
        params,
        initial: x0,
    })
}

/// Euler-Maruyama discretization and its positivity diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerPath {
    pub path: Path,
    /// Grid indices whose value is not strictly positive.
    pub non_positive: Vec<usize>,
}

impl EulerPath {
    pub fn stayed_positive(&self) -> bool {
        self.non_positive.is_empty()
    }
}

/// X_{i+1} = X_i (1 + mu dt + sigma dW_i). Excursions to non-positive
/// levels are recorded rather than treated as errors.
pub fn gbm_euler_path(params: GbmParams, x0: f64, w: &WienerPath) -> Result<EulerPath> {
    check_level(x0)?;
    let mut values = Vec::with_capacity(w.values.len());
    let mut non_positive = Vec::new();
    let mut x = x0;
    values.push(x);
    for i in 0..w.n_steps() {
        let dt = w.times[i + 1] - w.times[i];
        let dw = w.values[i + 1] - w.values[i];
        x *= 1.0 + params.mu * dt + params.sigma * dw;
        if !(x > 0.0) {
            non_positive.push(i + 1);
        }
        values.push(x);
    }
    Ok(EulerPath {
        path: Path {
            times: w.times.clone(),
            values,
            params,
            initial: x0,
        },
        non_positive,
    })
}

/// Long-format `path_id,t,value` dump of an ensemble of paths.
pub fn ensemble_csv<'a, I>(paths: I) -> String
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let mut out = String::from("path_id,t,value\n");
    for (id, (times, values)) in paths.into_iter().enumerate() {
        for (t, v) in times.iter().zip(values) {
            let _ = writeln!(out, "{id},{},{}", format_sig12(*t), format_sig12(*v));
        }
    }
    out
}
