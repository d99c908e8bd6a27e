#![allow(dead_code)]

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use velergo::{SeriesKind, TimeSeries};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn quarter(start_year: i32, i: usize) -> NaiveDate {
    let m = start_year * 12 + 3 * i as i32;
    NaiveDate::from_ymd_opt(m / 12, (m % 12) as u32 + 1, 1).unwrap()
}

pub fn quarterly(name: &str, start_year: i32, values: Vec<f64>) -> TimeSeries {
    let dates = (0..values.len()).map(|i| quarter(start_year, i)).collect();
    TimeSeries::new(name, dates, values, 0.25, SeriesKind::Level).unwrap()
}

/// Exact GBM sampled every `dt`, driven by `rng`.
pub fn gbm_levels(
    rng: &mut ChaCha8Rng,
    x0: f64,
    mu: f64,
    sigma: f64,
    dt: f64,
    n: usize,
) -> Vec<f64> {
    let mut x = x0;
    let mut out = vec![x];
    for _ in 1..n {
        x *= ((mu - 0.5 * sigma * sigma) * dt + sigma * dt.sqrt() * normal(rng)).exp();
        out.push(x);
    }
    out
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}
