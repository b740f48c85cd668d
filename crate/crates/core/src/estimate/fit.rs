use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

use super::{normal_quantile, EstimateSeries};

/// Weighted log-log regression of an estimate series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub rows_used: usize,
}

/// Weighted least squares of `ln p_hat` on `ln alpha` over the rows with
/// `p_hat > 0`. The standard deviation of `ln p_hat` is read off the
/// interval width, `(ci_hi - ci_lo) / (2 z p_hat)`; if some row has a
/// degenerate interval all rows get equal weight. The slope's standard error
/// is inflated by the reduced chi-square when the scatter exceeds the
/// interval widths.
pub fn fit_decay(series: &EstimateSeries) -> Result<DecayFit> {
    let rows: Vec<_> = series.rows.iter().filter(|r| r.estimate.p_hat > 0.0).collect();
    if rows.len() < 4 {
        return Err(Error::InsufficientPositive { have: rows.len(), need: 4 });
    }
    let z = normal_quantile(series.level);
    let x: Vec<f64> = rows.iter().map(|r| r.alpha.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.estimate.p_hat.ln()).collect();
    let sd: Vec<f64> = rows.iter().map(|r| (r.estimate.ci_hi - r.estimate.ci_lo) / (2.0 * z * r.estimate.p_hat)).collect();
    let w: Vec<f64> = if sd.iter().all(|&s| s > 0.0 && s.is_finite()) {
        sd.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; rows.len()]
    };
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = w.iter().zip(x.iter().zip(&y)).map(|(w, (x, y))| w * (x - xm) * (y - ym)).sum();
    if sxx <= 0.0 {
        return Err(invalid("fit needs at least two distinct scales"));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = w.iter().zip(x.iter().zip(&y)).map(|(w, (x, y))| w * (y - intercept - slope * x).powi(2)).sum();
    let dispersion = (chi2 / (rows.len() - 2) as f64).max(1.0);
    Ok(DecayFit { slope, stderr: (dispersion / sxx).sqrt(), intercept, rows_used: rows.len() })
}

pub const DEFAULT_CENSOR_CAP: f64 = 0.2;

/// Hill estimate of a Pareto tail index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub exponent_hat: f64,
    pub stderr: f64,
    pub k_used: usize,
    pub censored_fraction: f64,
}

/// Hill estimator over the `k` largest uncensored values, relative to the
/// `(k+1)`-th largest. Censored values are dropped and their share of all
/// samples reported.
pub fn tail_exponent(samples: &[(f64, bool)], k: usize, censor_cap: f64) -> Result<TailReport> {
    if k < 10 {
        return Err(invalid(format!("k = {k} must be at least 10")));
    }
    if samples.is_empty() {
        return Err(Error::NoTail("no samples".into()));
    }
    let censored = samples.iter().filter(|s| s.1).count();
    let censored_fraction = censored as f64 / samples.len() as f64;
    if censored_fraction > censor_cap {
        return Err(Error::TooCensored { fraction: censored_fraction, cap: censor_cap });
    }
    let mut values: Vec<f64> = samples.iter().filter(|s| !s.1).map(|s| s.0).collect();
    if values.len() <= k {
        return Err(Error::NoTail(format!("{} uncensored samples, need more than k = {k}", values.len())));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let threshold = values[k];
    if !(threshold > 0.0) {
        return Err(Error::NoTail(format!("the {}-th largest value is not positive", k + 1)));
    }
    let mean_log = values[..k].iter().map(|v| (v / threshold).ln()).sum::<f64>() / k as f64;
    if mean_log <= 0.0 {
        return Err(Error::NoTail("top order statistics are all equal".into()));
    }
    let exponent_hat = 1.0 / mean_log;
    Ok(TailReport { exponent_hat, stderr: exponent_hat / (k as f64).sqrt(), k_used: k, censored_fraction })
}
