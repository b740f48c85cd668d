//! Monte Carlo estimation: replication harness, Wilson intervals, scale
//! sweeps, decay and tail fits, mixing covariance and the multiscale
//! certificate.

mod certificate;
mod fit;
mod mixing;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::events::{eval_event, sample_for_event, EventSpec};
use crate::graphgen::WindowPolicy;
use crate::models::ModelSpec;
use crate::pointproc::{Purpose, RngStream};

pub use certificate::{multiscale_certificate, CertificateReport, ScalePair};
pub use fit::{fit_decay, tail_exponent, DecayFit, TailReport, DEFAULT_CENSOR_CAP};
pub use mixing::{h_truncation_mass, mixing_cov, mixing_window, MixingEstimate};

pub const DEFAULT_LEVEL: f64 = 0.95;

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + level / 2.0)
}

/// A proportion with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_reps: u64,
    pub successes: u64,
}

impl Estimate {
    pub fn wilson(successes: u64, n_reps: u64, level: f64) -> Result<Self> {
        if n_reps == 0 || successes > n_reps {
            return Err(invalid(format!("{successes} successes out of {n_reps} replications")));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(invalid(format!("confidence level {level} must lie in (0, 1)")));
        }
        let n = n_reps as f64;
        let p = successes as f64 / n;
        let z = normal_quantile(level);
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        let ci_lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
        let ci_hi = if successes == n_reps { 1.0 } else { (center + half).clamp(p, 1.0) };
        Ok(Self { p_hat: p, ci_lo, ci_hi, n_reps, successes })
    }
}

/// Runs `trial` on replications `0..n_reps`, each with its own stream.
/// Results come back in replication order whatever the thread count.
pub fn replicate<T, F>(n_reps: u64, rng: &RngStream, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&RngStream) -> Result<T> + Sync,
{
    (0..n_reps).into_par_iter().map(|r| trial(&rng.replication(r))).collect()
}

/// Wilson estimate of the success probability of `trial`.
pub fn estimate_bernoulli<F>(n_reps: u64, rng: &RngStream, level: f64, trial: F) -> Result<Estimate>
where
    F: Fn(&RngStream) -> Result<bool> + Sync,
{
    if n_reps == 0 {
        return Err(invalid("n_reps must be at least 1"));
    }
    let outcomes = replicate(n_reps, rng, trial)?;
    Estimate::wilson(outcomes.iter().filter(|&&b| b).count() as u64, n_reps, level)
}

/// Settings shared by the event estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    pub dimension: usize,
    pub level: f64,
    pub policy: WindowPolicy,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { dimension: 2, level: DEFAULT_LEVEL, policy: WindowPolicy::default() }
    }
}

/// One replication of an event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub event: String,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub replication: u64,
    pub outcome: bool,
    pub censored: bool,
}

pub fn run_trials(
    model: &ModelSpec,
    event: &EventSpec,
    lambda: f64,
    n_reps: u64,
    rng: &RngStream,
    opts: &EstimateOptions,
) -> Result<Vec<TrialRecord>> {
    event.validate(opts.dimension)?;
    replicate(n_reps, rng, |s| {
        let g = sample_for_event(model, event, opts.dimension, lambda, s, &opts.policy)?;
        Ok(TrialRecord {
            event: event.name().to_string(),
            alpha: event.alpha(),
            lambda,
            seed: s.master_seed,
            replication: s.label.replication,
            outcome: eval_event(&g, event)?,
            censored: false,
        })
    })
}

pub fn estimate_prob(
    model: &ModelSpec,
    event: &EventSpec,
    lambda: f64,
    n_reps: u64,
    rng: &RngStream,
    opts: &EstimateOptions,
) -> Result<Estimate> {
    if n_reps == 0 {
        return Err(invalid("n_reps must be at least 1"));
    }
    let trials = run_trials(model, event, lambda, n_reps, rng, opts)?;
    Estimate::wilson(trials.iter().filter(|t| t.outcome).count() as u64, n_reps, opts.level)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub alpha: f64,
    pub estimate: Estimate,
}

/// Estimates of one event family over increasing scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSeries {
    pub event: String,
    pub model: Option<ModelSpec>,
    pub lambda: f64,
    pub seed: u64,
    pub level: f64,
    /// Common ratio of the scale grid when it is geometric.
    pub grid_ratio: Option<f64>,
    pub rows: Vec<SeriesRow>,
}

impl EstimateSeries {
    /// Series from explicit rows; scales must increase strictly.
    pub fn from_rows(event: &str, lambda: f64, level: f64, rows: Vec<SeriesRow>) -> Result<Self> {
        let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
        check_grid(&alphas)?;
        Ok(Self { event: event.to_string(), model: None, lambda, seed: 0, level, grid_ratio: geometric_ratio(&alphas), rows })
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.alpha).collect()
    }
}

fn check_grid(alphas: &[f64]) -> Result<()> {
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("alpha grid must be strictly increasing"));
    }
    Ok(())
}

fn geometric_ratio(alphas: &[f64]) -> Option<f64> {
    if alphas.len() < 2 {
        return None;
    }
    let q = alphas[1] / alphas[0];
    alphas.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-9).then_some(q)
}

/// `estimate_prob` at every scale of `alpha_grid`, each scale on its own stream.
pub fn sweep(
    model: &ModelSpec,
    event: &EventSpec,
    alpha_grid: &[f64],
    lambda: f64,
    n_reps: u64,
    rng: &RngStream,
    opts: &EstimateOptions,
) -> Result<EstimateSeries> {
    Ok(sweep_with_trials(model, event, alpha_grid, lambda, n_reps, rng, opts)?.0)
}

/// [`sweep`] that also returns every replication, scale by scale.
pub fn sweep_with_trials(
    model: &ModelSpec,
    event: &EventSpec,
    alpha_grid: &[f64],
    lambda: f64,
    n_reps: u64,
    rng: &RngStream,
    opts: &EstimateOptions,
) -> Result<(EstimateSeries, Vec<TrialRecord>)> {
    check_grid(alpha_grid)?;
    if n_reps == 0 {
        return Err(invalid("n_reps must be at least 1"));
    }
    let mut rows = Vec::with_capacity(alpha_grid.len());
    let mut all = Vec::new();
    for (k, &alpha) in alpha_grid.iter().enumerate() {
        let e = event.with_alpha(alpha);
        let stream = rng.derive(Purpose::Scale, [k as u64, alpha.to_bits()]);
        let trials = run_trials(model, &e, lambda, n_reps, &stream, opts)?;
        let successes = trials.iter().filter(|t| t.outcome).count() as u64;
        rows.push(SeriesRow { alpha, estimate: Estimate::wilson(successes, n_reps, opts.level)? });
        all.extend(trials);
    }
    let series = EstimateSeries {
        event: event.name().to_string(),
        model: Some(*model),
        lambda,
        seed: rng.master_seed,
        level: opts.level,
        grid_ratio: geometric_ratio(alpha_grid),
        rows,
    };
    Ok((series, all))
}

#[cfg(test)]
mod tests;
