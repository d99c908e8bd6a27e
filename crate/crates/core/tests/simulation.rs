//! Monte Carlo moment checks for the path generators, against closed forms
//! written out here.

mod common;

use common::{mean, sample_var};
use velergo::emo::z_coefficients;
use velergo::forecast::analytic_mean;
use velergo::stochastic::{driver_pair, substream};
use velergo::{
    forecast_velocity, gbm_euler_path, gbm_exact_path, simulate_z_ensemble, wiener_path,
    DriverMode, EmoConfig, ForecastOptions, GbmParams, WienerPath,
};

const PATHS: u64 = 100_000;

fn terminals(horizon: f64, n_steps: usize) -> Vec<f64> {
    (0..PATHS)
        .map(|k| {
            WienerPath::generate(horizon, n_steps, 11, k)
                .unwrap()
                .terminal()
        })
        .collect()
}

#[test]
fn brownian_terminal_moments() {
    let w = terminals(1.0, 4);
    let n = w.len() as f64;
    assert!(mean(&w).abs() < 3.0 / n.sqrt());
    let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
    // Var W(1) = 1; the estimator of E[W^2] has variance 2
    assert!((mean(&sq) - 1.0).abs() < 3.0 * (2.0 / n).sqrt());
}

#[test]
fn brownian_increments_are_independent_with_variance_dt() {
    let w = wiener_path(100.0, 10_000, 5).unwrap();
    let inc: Vec<f64> = w.values().windows(2).map(|p| p[1] - p[0]).collect();
    let n = inc.len() as f64;
    assert!((sample_var(&inc) / 0.01 - 1.0).abs() < 3.0 * (2.0 / n).sqrt());
    let lag1: f64 = inc.windows(2).map(|p| p[0] * p[1]).sum::<f64>() / (n - 1.0) / 0.01;
    assert!(lag1.abs() < 3.0 / n.sqrt());
}

#[test]
fn gbm_mean_matches_lognormal_oracle() {
    let p = GbmParams::new(0.08, 0.3).unwrap();
    let x: Vec<f64> = (0..PATHS)
        .map(|k| {
            let w = WienerPath::generate(1.0, 1, 2, k).unwrap();
            *gbm_exact_path(p, 2.0, &w).unwrap().values.last().unwrap()
        })
        .collect();
    let se = (sample_var(&x) / x.len() as f64).sqrt();
    assert!((mean(&x) - 2.0 * 0.08f64.exp()).abs() < 3.0 * se);
}

#[test]
fn gbm_log_increments() {
    let (mu, sigma, dt) = (0.05, 0.2, 0.25);
    let p = GbmParams::new(mu, sigma).unwrap();
    let w = wiener_path(2500.0, 10_000, 3).unwrap();
    let path = gbm_exact_path(p, 1.0, &w).unwrap();
    let r: Vec<f64> = path.values.windows(2).map(|v| (v[1] / v[0]).ln()).collect();
    let n = r.len() as f64;
    let var = sigma * sigma * dt;
    assert!((mean(&r) - (mu - 0.5 * sigma * sigma) * dt).abs() < 3.0 * (var / n).sqrt());
    assert!((sample_var(&r) / var - 1.0).abs() < 3.0 * (2.0 / n).sqrt());
}

#[test]
fn euler_converges_to_exact_solution() {
    let p = GbmParams::new(0.1, 0.25).unwrap();
    let mean_error = |n_steps: usize| {
        (0..200u64)
            .map(|k| {
                let w = WienerPath::generate(1.0, n_steps, 9, k).unwrap();
                let e = gbm_euler_path(p, 1.0, &w).unwrap();
                let x = gbm_exact_path(p, 1.0, &w).unwrap();
                (e.path.values.last().unwrap() - x.values.last().unwrap()).abs()
            })
            .sum::<f64>()
            / 200.0
    };
    let coarse = mean_error(16);
    let fine = mean_error(1024);
    // strong order 1/2 at least: 64x finer grid, at least 4x smaller error
    assert!(fine < coarse / 4.0, "coarse {coarse}, fine {fine}");
}

#[test]
fn euler_reports_non_positive_excursions() {
    let p = GbmParams::new(0.0, 3.0).unwrap();
    let w = wiener_path(10.0, 10, 1).unwrap();
    let hits = (0..50u64)
        .map(|s| {
            let w = WienerPath::generate(10.0, 10, s, 0).unwrap();
            gbm_euler_path(p, 1.0, &w).unwrap()
        })
        .filter(|e| !e.stayed_positive())
        .count();
    assert!(hits > 0);
    assert!(gbm_exact_path(p, 1.0, &w)
        .unwrap()
        .values
        .iter()
        .all(|v| *v > 0.0));
}

#[test]
fn correlated_drivers_have_requested_correlation() {
    let rho = 0.6;
    let pairs: Vec<(f64, f64)> = (0..20_000u64)
        .map(|k| {
            let (a, b) = driver_pair(1.0, 2, 4, k, DriverMode::Correlated(rho)).unwrap();
            (a.terminal(), b.terminal())
        })
        .collect();
    let n = pairs.len() as f64;
    let c = pairs.iter().map(|(a, b)| a * b).sum::<f64>() / n;
    assert!((c - rho).abs() < 3.0 * ((1.0 + rho * rho) / n).sqrt());
    let (a, _) = driver_pair(1.0, 2, 4, 0, DriverMode::Independent).unwrap();
    assert_eq!(a, WienerPath::generate(1.0, 2, 4, substream(0, 0)).unwrap());
}

#[test]
fn forecast_mean_matches_analytic_mean() {
    let px = GbmParams::new(0.06, 0.09).unwrap();
    let pm = GbmParams::new(0.07, 0.03).unwrap();
    let opts = ForecastOptions {
        horizon: 5.0,
        n_paths: PATHS as usize,
        seed: 21,
        ..ForecastOptions::default()
    };
    let fan = forecast_velocity(1.8, px, pm, &opts).unwrap();
    // lognormal: V_T = v0 exp(m + s W_T)
    let m = (px.mu - pm.mu - 0.5 * (px.sigma * px.sigma - pm.sigma * pm.sigma)) * 5.0;
    let s2 = (px.sigma - pm.sigma).powi(2) * 5.0;
    let oracle = 1.8 * (m + 0.5 * s2).exp();
    let sd = oracle * (s2.exp() - 1.0).sqrt();
    let got = *fan.mean_path.last().unwrap();
    assert!((got - oracle).abs() < 3.0 * sd / (PATHS as f64).sqrt());
    assert!((analytic_mean(1.8, px, pm, DriverMode::Shared, 5.0) / oracle - 1.0).abs() < 1e-12);
    // median of a lognormal is its geometric centre
    let q50 = fan.quantiles[2].last().unwrap();
    assert!((q50 / (1.8 * m.exp()) - 1.0).abs() < 0.01);
}

#[test]
fn forecast_extension_keeps_leading_paths() {
    let px = GbmParams::new(0.06, 0.09).unwrap();
    let pm = GbmParams::new(0.07, 0.03).unwrap();
    let run = |n| {
        let o = ForecastOptions {
            n_paths: n,
            seed: 8,
            quantiles: vec![0.0, 1.0],
            ..ForecastOptions::default()
        };
        forecast_velocity(1.5, px, pm, &o).unwrap()
    };
    // min/max over the larger ensemble can only widen
    let (a, b) = (run(200), run(400));
    for i in 0..a.dates.len() {
        assert!(b.quantiles[0][i] <= a.quantiles[0][i]);
        assert!(b.quantiles[1][i] >= a.quantiles[1][i]);
    }
}

#[test]
fn z_ensemble_moments() {
    let px = GbmParams::new(0.03, 0.2).unwrap();
    let pm = GbmParams::new(0.01, 0.1).unwrap();
    let (t, beta) = (10.0, 1.6);
    let cfg = EmoConfig::new(beta, t).unwrap();
    let ens = simulate_z_ensemble(px, pm, &cfg, 20, 20_000, 5).unwrap();
    let (a, b) = z_coefficients(px, pm);
    let n = ens.count() as f64;
    let means = ens.mean();
    let vars = ens.variance().unwrap();
    for (i, delta) in ens.grid().iter().enumerate().skip(1) {
        let oracle = (a * a * delta * delta * t + 2.0 * a * b * delta * delta + b * b * delta)
            / t.powf(2.0 * beta);
        assert!(
            means[i].abs() < 4.0 * (oracle / n).sqrt(),
            "mean at {delta}"
        );
        assert!(
            (vars[i] / oracle - 1.0).abs() < 4.0 * (2.0 / n).sqrt(),
            "variance at {delta}"
        );
    }
}
