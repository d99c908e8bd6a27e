//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use velergo::emo::default_beta_grid;
use velergo::ergodicity::DEFAULT_TOLERANCE;
use velergo::forecast::MIN_FORECAST_PATHS;
use velergo::io::Metadata;
use velergo::{Aggregation, DriverMode, EvaluationSpace};

use crate::error::CliError;

/// Keys accepted in config files, in the order they are echoed to sidecars.
pub const KEYS: [&str; 14] = [
    "gdp",
    "money",
    "out-dir",
    "split",
    "beta-grid",
    "horizon",
    "horizons",
    "n-paths",
    "seed",
    "driver-mode",
    "space",
    "tolerance",
    "money-aggregation",
    "sample-paths",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gdp: PathBuf,
    pub money: PathBuf,
    pub out_dir: PathBuf,
    /// First date of the holdout window.
    pub split: NaiveDate,
    pub beta_grid: Vec<f64>,
    /// Forecast horizon in years.
    pub horizon: f64,
    /// Operator horizons T (years) for the ergodicity sweep.
    pub horizons: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub driver_mode: DriverMode,
    pub space: EvaluationSpace,
    pub tolerance: f64,
    pub money_aggregation: Aggregation,
    /// Number of operator paths written for plotting.
    pub sample_paths: usize,
}

/// Reads `key = value` lines. Blank lines and `#` comments are ignored;
/// anything else is an error.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("config line {}: expected `key = value`", i + 1))
        })?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!(
                "config line {}: unknown key {key:?}",
                i + 1
            )));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::config(format!("{key}: cannot parse {raw:?}")))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',').map(|s| parse_value::<f64>(key, s)).collect()
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Merges `file` (if any) with `flags`; flags win.
    pub fn resolve(
        file: Option<&Path>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut raw = match file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::config(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            raw.insert(k.clone(), v.clone());
        }
        Self::from_map(&raw)
    }

    fn from_map(raw: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str| raw.get(k).map(String::as_str);
        let gdp = get("gdp").ok_or_else(|| CliError::config("gdp: no input file given"))?;
        let money = get("money").ok_or_else(|| CliError::config("money: no input file given"))?;
        let split = match get("split") {
            Some(s) => NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map_err(|_| CliError::config(format!("split: expected YYYY-MM-DD, got {s:?}")))?,
            None => NaiveDate::from_ymd_opt(2008, 1, 1).expect("valid date"),
        };
        let driver_mode = match get("driver-mode") {
            Some(s) => s
                .parse()
                .map_err(|e| CliError::config(format!("driver-mode: {e}")))?,
            None => DriverMode::Shared,
        };
        let space = match get("space") {
            Some(s) => s
                .parse()
                .map_err(|e| CliError::config(format!("space: {e}")))?,
            None => EvaluationSpace::Returns,
        };
        let money_aggregation = match get("money-aggregation") {
            Some(s) => s
                .parse()
                .map_err(|e| CliError::config(format!("money-aggregation: {e}")))?,
            None => Aggregation::Mean,
        };
        let cfg = RunConfig {
            gdp: PathBuf::from(gdp),
            money: PathBuf::from(money),
            out_dir: PathBuf::from(get("out-dir").unwrap_or("out")),
            split,
            beta_grid: get("beta-grid")
                .map(|s| parse_list("beta-grid", s))
                .transpose()?
                .unwrap_or_else(default_beta_grid),
            horizon: get("horizon")
                .map(|s| parse_value("horizon", s))
                .transpose()?
                .unwrap_or(5.0),
            horizons: get("horizons")
                .map(|s| parse_list("horizons", s))
                .transpose()?
                .unwrap_or_else(|| vec![50.0, 100.0, 200.0]),
            n_paths: get("n-paths")
                .map(|s| parse_value("n-paths", s))
                .transpose()?
                .unwrap_or(10_000),
            seed: get("seed")
                .map(|s| parse_value("seed", s))
                .transpose()?
                .unwrap_or(0),
            driver_mode,
            space,
            tolerance: get("tolerance")
                .map(|s| parse_value("tolerance", s))
                .transpose()?
                .unwrap_or(DEFAULT_TOLERANCE),
            money_aggregation,
            sample_paths: get("sample-paths")
                .map(|s| parse_value("sample-paths", s))
                .transpose()?
                .unwrap_or(20),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for path in [&self.gdp, &self.money] {
            if !path.is_file() {
                return Err(CliError::config(format!(
                    "input file not found: {}",
                    path.display()
                )));
            }
        }
        if self.beta_grid.is_empty() {
            return Err(CliError::config("beta-grid is empty"));
        }
        if let Some(b) = self
            .beta_grid
            .iter()
            .find(|b| !(**b > 1.5 && b.is_finite()))
        {
            return Err(CliError::config(format!(
                "beta-grid: inhibition degree must exceed 3/2, got {b}"
            )));
        }
        if self.beta_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config("beta-grid must be strictly increasing"));
        }
        if self.n_paths < MIN_FORECAST_PATHS {
            return Err(CliError::config(format!(
                "n-paths must be at least {MIN_FORECAST_PATHS}, got {}",
                self.n_paths
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CliError::config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.horizons.is_empty() || self.horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::config("horizons must be positive"));
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config("horizons must be strictly increasing"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(CliError::config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        self.driver_mode
            .validate()
            .map_err(|e| CliError::config(format!("driver-mode: {e}")))?;
        Ok(())
    }

    /// Every setting as it was resolved, for the metadata sidecar.
    pub fn echo(&self, meta: &mut Metadata) {
        meta.insert("gdp", self.gdp.display());
        meta.insert("money", self.money.display());
        meta.insert("out-dir", self.out_dir.display());
        meta.insert("split", self.split);
        meta.insert("beta-grid", join(&self.beta_grid));
        meta.insert("horizon", self.horizon);
        meta.insert("horizons", join(&self.horizons));
        meta.insert("n-paths", self.n_paths);
        meta.insert("seed", self.seed);
        meta.insert("driver-mode", self.driver_mode);
        meta.insert("space", self.space);
        meta.insert("tolerance", self.tolerance);
        meta.insert("money-aggregation", self.money_aggregation);
        meta.insert("sample-paths", self.sample_paths);
    }
}
