//! Pipeline steps. Each step reads the inputs named in the config, writes
//! its artifacts to the output directory and a `<step>.meta` sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use velergo::calibration::{beta_sweep, mle_gbm, GbmEstimate};
use velergo::emo::{z_from_data, EmoConfig};
use velergo::ergodicity::{assess_mean_ergodicity, mean_ergodicity_statistic, mean_reversion_test};
use velergo::evaluate::{compare_models, log_ergodic_predictor, qtm_baseline, Model};
use velergo::forecast::{analytic_mean, forecast_velocity, simulate_z_ensemble, ForecastOptions};
use velergo::io::{format_sig12, Metadata};
use velergo::stochastic::{ensemble_csv, substream, WienerPath};
use velergo::timeseries::{
    downsample, log_returns, read_series_csv, split_at, velocity_from, TimeSeries,
};
use velergo::CovEstimator;

use crate::config::RunConfig;
use crate::error::CliError;

/// Bumped whenever an artifact layout changes.
pub const ARTIFACT_VERSION: &str = "1";

type CmdResult<T = ()> = Result<T, CliError>;

/// Stream reserved for the driver of the data-based operator path, well
/// away from the ensemble member streams.
const EMPIRICAL_STREAM: u64 = 1 << 40;

struct Inputs {
    gdp: TimeSeries,
    money: TimeSeries,
    velocity: TimeSeries,
}

struct Output<'a> {
    dir: &'a Path,
    meta: Metadata,
    artifacts: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(cfg: &'a RunConfig, command: &str) -> CmdResult<Self> {
        fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::write_failed(&cfg.out_dir, e))?;
        let mut meta = Metadata::new()
            .with("command", command)
            .with("tool-version", env!("CARGO_PKG_VERSION"))
            .with("artifact-version", ARTIFACT_VERSION);
        cfg.echo(&mut meta);
        Ok(Self {
            dir: &cfg.out_dir,
            meta,
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> CmdResult {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::write_failed(&path, e))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, command: &str) -> CmdResult<Vec<PathBuf>> {
        self.meta.insert("artifacts", self.artifacts.join(","));
        let name = format!("{command}.meta");
        let path = self.dir.join(&name);
        fs::write(&path, self.meta.to_text()).map_err(|e| CliError::write_failed(&path, e))?;
        let mut written: Vec<PathBuf> = self.artifacts.iter().map(|a| self.dir.join(a)).collect();
        written.push(path);
        Ok(written)
    }
}

fn lib<T>(context: &str, r: velergo::Result<T>) -> CmdResult<T> {
    r.map_err(|e| CliError::from_lib(context, e))
}

fn finite(context: &str, v: f64) -> CmdResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::numeric(format!("{context}: non-finite result")))
    }
}

fn load(cfg: &RunConfig) -> CmdResult<Inputs> {
    let read = |p: &Path| lib(&p.display().to_string(), read_series_csv(p));
    let gdp = read(&cfg.gdp)?;
    let raw_money = read(&cfg.money)?;
    let money = lib(
        &cfg.money.display().to_string(),
        downsample(&raw_money, gdp.period(), cfg.money_aggregation),
    )?;
    let velocity = lib("velocity", velocity_from(&gdp, &money))?.into_series();
    Ok(Inputs {
        gdp,
        money,
        velocity,
    })
}

/// Splits `series` at the configured date.
fn split(cfg: &RunConfig, series: &TimeSeries) -> CmdResult<(TimeSeries, TimeSeries)> {
    lib(
        &format!("split of {} at {}", series.name(), cfg.split),
        split_at(series, cfg.split),
    )
}

/// GDP and money restricted to the dates of a velocity window.
fn restrict(series: &TimeSeries, window: &TimeSeries) -> CmdResult<TimeSeries> {
    let (first, last) = (window.first_date(), window.last_date());
    let days = velergo::timeseries::JOIN_WINDOW_DAYS;
    let keep: Vec<usize> = (0..series.len())
        .filter(|i| {
            let d = series.dates()[*i];
            (d - first).num_days() >= -days && (d - last).num_days() <= days
        })
        .collect();
    if keep.is_empty() {
        return Err(CliError::data(format!(
            "{}: no observations in the window",
            series.name()
        )));
    }
    lib(
        series.name(),
        TimeSeries::new(
            series.name(),
            keep.iter().map(|i| series.dates()[*i]).collect(),
            keep.iter().map(|i| series.values()[*i]).collect(),
            series.period(),
            series.kind(),
        ),
    )
}

fn train_estimates(
    cfg: &RunConfig,
    inputs: &Inputs,
) -> CmdResult<(TimeSeries, GbmEstimate, GbmEstimate)> {
    let (train, _) = split(cfg, &inputs.velocity)?;
    let gdp = restrict(&inputs.gdp, &train)?;
    let money = restrict(&inputs.money, &train)?;
    let gx = lib("GDP calibration", mle_gbm(&gdp))?;
    let gm = lib("money calibration", mle_gbm(&money))?;
    Ok((train, gx, gm))
}

fn record_estimates(meta: &mut Metadata, prefix: &str, gx: &GbmEstimate, gm: &GbmEstimate) {
    meta.insert(format!("{prefix}mu_X"), format_sig12(gx.params.mu));
    meta.insert(format!("{prefix}sigma_X"), format_sig12(gx.params.sigma));
    meta.insert(format!("{prefix}mu_M"), format_sig12(gm.params.mu));
    meta.insert(format!("{prefix}sigma_M"), format_sig12(gm.params.sigma));
    meta.insert(format!("{prefix}n_obs"), gx.n_obs);
}

pub fn ingest(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let inputs = load(cfg)?;
    let returns = lib("velocity returns", log_returns(&inputs.velocity))?;
    let mut out = Output::new(cfg, "ingest")?;
    out.write("velocity.csv", &inputs.velocity.to_csv_string())?;
    out.write("velocity_returns.csv", &returns.to_csv_string())?;
    let m = &mut out.meta;
    m.insert("gdp-series", inputs.gdp.name());
    m.insert("gdp-rows", inputs.gdp.len());
    m.insert("money-series", inputs.money.name());
    m.insert("money-rows", inputs.money.len());
    m.insert("period", inputs.velocity.period());
    m.insert("velocity-rows", inputs.velocity.len());
    m.insert("velocity-first", inputs.velocity.first_date());
    m.insert("velocity-last", inputs.velocity.last_date());
    out.finish("ingest")
}

pub fn calibrate(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let inputs = load(cfg)?;
    let (train, _) = split(cfg, &inputs.velocity)?;
    let gdp = restrict(&inputs.gdp, &train)?;
    let money = restrict(&inputs.money, &train)?;
    let table = lib("calibration", beta_sweep(&gdp, &money, &cfg.beta_grid))?;
    let mut out = Output::new(cfg, "calibrate")?;
    out.write("calibration.csv", &table.to_csv_string())?;
    out.write("calibration.txt", &table.to_text_table())?;
    out.meta.insert("train-first", train.first_date());
    out.meta.insert("train-last", train.last_date());
    let row = &table.rows[0];
    record_estimates(&mut out.meta, "", &row.gdp, &row.money);
    out.finish("calibrate")
}

fn step_count(horizon: f64, period: f64) -> CmdResult<usize> {
    let steps = horizon / period;
    if (steps - steps.round()).abs() > 1e-9 || steps.round() < 1.0 {
        return Err(CliError::config(format!(
            "horizon {horizon} is not a whole number of {period}-year steps"
        )));
    }
    Ok(steps.round() as usize)
}

pub fn ergodicity(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let inputs = load(cfg)?;
    let (train, gx, gm) = train_estimates(cfg, &inputs)?;
    let period = inputs.velocity.period();
    let steps: Vec<usize> = cfg
        .horizons
        .iter()
        .map(|t| step_count(*t, period))
        .collect::<CmdResult<_>>()?;

    let mut csv = String::from("beta,horizon,statistic\n");
    let mut report = Metadata::new();
    report.insert("estimator", "stationarized");
    report.insert("tolerance", format_sig12(cfg.tolerance));
    let mut samples = String::new();
    for (bi, beta) in cfg.beta_grid.iter().enumerate() {
        let mut stats = Vec::with_capacity(cfg.horizons.len());
        for (t, n_steps) in cfg.horizons.iter().zip(&steps) {
            let config = lib("operator", EmoConfig::new(*beta, *t))?;
            let ens = lib(
                "operator ensemble",
                simulate_z_ensemble(
                    gx.params,
                    gm.params,
                    &config,
                    *n_steps,
                    cfg.n_paths,
                    cfg.seed,
                ),
            )?;
            let s = lib(
                "ergodicity statistic",
                mean_ergodicity_statistic(&ens, *t, CovEstimator::Stationarized),
            )?;
            let s = finite("ergodicity statistic", s)?;
            let _ = writeln!(
                csv,
                "{},{},{}",
                format_sig12(*beta),
                format_sig12(*t),
                format_sig12(s)
            );
            stats.push((*t, s));
            if bi == 0 && Some(t) == cfg.horizons.last() {
                let shown = cfg.sample_paths.min(ens.count());
                samples = ensemble_csv((0..shown).map(|k| (ens.grid(), ens.path(k))));
            }
        }
        let key = format!("beta.{}", format_sig12(*beta));
        let (verdict, note) = if stats.len() < 3 {
            (
                "Inconclusive".to_string(),
                format!("{} horizon(s) given; a trend needs at least 3", stats.len()),
            )
        } else {
            let r = lib("verdict", assess_mean_ergodicity(&stats, cfg.tolerance))?;
            (r.verdict.to_string(), r.note)
        };
        report.insert(format!("{key}.verdict"), verdict);
        report.insert(format!("{key}.note"), note);
    }

    // operator image of the observed log-velocity over the training window
    let returns = lib("velocity returns", log_returns(&train))?;
    let t_data = returns.len() as f64 * period;
    let driver = lib(
        "empirical driver",
        WienerPath::generate(
            t_data,
            returns.len(),
            cfg.seed,
            substream(EMPIRICAL_STREAM, 0),
        ),
    )?;
    let mut empirical = String::from("beta,delta,value\n");
    for beta in &cfg.beta_grid {
        let config = lib("operator", EmoConfig::new(*beta, t_data))?;
        let z = lib(
            "empirical operator path",
            z_from_data(&returns, &config, &driver),
        )?;
        for (d, v) in z.deltas.iter().zip(&z.values) {
            let _ = writeln!(
                empirical,
                "{},{},{}",
                format_sig12(*beta),
                format_sig12(*d),
                format_sig12(*v)
            );
        }
        let key = format!("beta.{}", format_sig12(*beta));
        match mean_reversion_test(&z.values) {
            Ok(mr) => {
                report.insert(format!("{key}.empirical.slope"), format_sig12(mr.slope));
                report.insert(format!("{key}.empirical.t_stat"), format_sig12(mr.t_stat));
                report.insert(format!("{key}.empirical.p_value"), format_sig12(mr.p_value));
                report.insert(format!("{key}.empirical.reverting"), mr.reverting);
            }
            Err(e) => report.insert(format!("{key}.empirical.reverting"), format!("n/a ({e})")),
        }
    }

    let mut out = Output::new(cfg, "ergodicity")?;
    out.write("ergodicity.csv", &csv)?;
    out.write("ergodicity_report.txt", &report.to_text())?;
    out.write("z_paths.csv", &samples)?;
    out.write("z_empirical.csv", &empirical)?;
    record_estimates(&mut out.meta, "", &gx, &gm);
    out.meta.insert("empirical-stream", EMPIRICAL_STREAM);
    out.finish("ergodicity")
}

pub fn forecast(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let inputs = load(cfg)?;
    let gx = lib("GDP calibration", mle_gbm(&inputs.gdp))?;
    let gm = lib("money calibration", mle_gbm(&inputs.money))?;
    let v0 = inputs.velocity.last_value();
    let options = ForecastOptions {
        start: inputs.velocity.last_date(),
        period: inputs.velocity.period(),
        horizon: cfg.horizon,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        driver_mode: cfg.driver_mode,
        ..ForecastOptions::default()
    };
    let fan = lib(
        "forecast",
        forecast_velocity(v0, gx.params, gm.params, &options),
    )?;
    if fan.mean_path.iter().any(|v| !v.is_finite()) {
        return Err(CliError::numeric("forecast: non-finite ensemble mean"));
    }
    let mut out = Output::new(cfg, "forecast")?;
    out.write("forecast.csv", &fan.to_csv_string())?;
    record_estimates(&mut out.meta, "", &gx, &gm);
    out.meta.insert("v0", format_sig12(v0));
    out.meta.insert("start", options.start);
    out.meta.insert(
        "analytic-mean-at-horizon",
        format_sig12(analytic_mean(
            v0,
            gx.params,
            gm.params,
            cfg.driver_mode,
            cfg.horizon,
        )),
    );
    out.finish("forecast")
}

pub fn compare(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let inputs = load(cfg)?;
    let (train, gx, gm) = train_estimates(cfg, &inputs)?;
    let (_, holdout) = split(cfg, &inputs.velocity)?;
    let qtm = lib("QTM baseline", qtm_baseline(&train))?;
    let ergodic = lib(
        "log-ergodic predictor",
        log_ergodic_predictor(
            &gx,
            &gm,
            train.last_value(),
            train.last_date(),
            cfg.driver_mode,
        ),
    )?;
    let models = [
        Model {
            name: "QTM".into(),
            k: 1,
            predictor: qtm,
        },
        Model {
            name: "Log-ergodic".into(),
            k: 4,
            predictor: ergodic,
        },
    ];
    let table = lib(
        "comparison",
        compare_models(&train, &holdout, &models, cfg.space),
    )?;
    let mut out = Output::new(cfg, "compare")?;
    out.write("comparison.csv", &table.to_csv_string())?;
    out.write("comparison.txt", &table.to_text_table())?;
    record_estimates(&mut out.meta, "", &gx, &gm);
    out.meta.insert("train-window", &table.train_label);
    out.meta.insert("holdout-window", &table.holdout_label);
    out.finish("compare")
}

pub fn run_all(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for step in [ingest, calibrate, ergodicity, forecast, compare] {
        written.extend(step(cfg)?);
    }
    let mut out = Output::new(cfg, "run-all")?;
    out.meta
        .insert("steps", "ingest,calibrate,ergodicity,forecast,compare");
    written.extend(out.finish("run-all")?);
    Ok(written)
}
