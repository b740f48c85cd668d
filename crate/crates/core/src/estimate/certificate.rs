use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::EstimateSeries;

/// Check of one scale pair `(α, 10^d α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePair {
    pub alpha: f64,
    pub alpha_far: f64,
    /// `C2 · ci_lo(10^d α)`
    pub lhs: f64,
    /// `(C2 · ci_hi(α))² + C2 λ α^{-decay_exp}`
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub pairs: Vec<ScalePair>,
    pub all_pairs_pass: bool,
    /// `C2 · p_hat <= 1/2` on every row of `[α_min, 10^d α_min]`.
    pub bootstrap_holds: bool,
    pub base_interval: (f64, f64),
    pub c2: f64,
    pub decay_exp: f64,
}

/// Empirical check of the one-step multiscale recursion
/// `C2 P(G(10^d α)) <= (C2 P(G(α)))² + C2 λ α^{-decay_exp}`
/// on every available scale pair of `series`. The interval bounds give the
/// check its slack: the lower bound at the large scale against the upper
/// bound at the small one.
pub fn multiscale_certificate(series: &EstimateSeries, lambda: f64, decay_exp: f64, c2: f64, d: usize) -> Result<CertificateReport> {
    if series.rows.is_empty() {
        return Err(Error::InsufficientCoverage("empty series".into()));
    }
    let factor = 10f64.powi(d as i32);
    let find = |alpha: f64| series.rows.iter().find(|r| (r.alpha / alpha - 1.0).abs() < 1e-6);
    let pairs: Vec<ScalePair> = series
        .rows
        .iter()
        .filter_map(|small| {
            let big = find(small.alpha * factor)?;
            let lhs = c2 * big.estimate.ci_lo;
            let rhs = (c2 * small.estimate.ci_hi).powi(2) + c2 * lambda * small.alpha.powf(-decay_exp);
            Some(ScalePair { alpha: small.alpha, alpha_far: big.alpha, lhs, rhs, pass: lhs <= rhs })
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::InsufficientCoverage(format!("no pair of scales a factor {factor} apart")));
    }
    let alpha_min = series.rows[0].alpha;
    let base_interval = (alpha_min, alpha_min * factor * (1.0 + 1e-9));
    let bootstrap_holds = series
        .rows
        .iter()
        .filter(|r| r.alpha <= base_interval.1)
        .all(|r| c2 * r.estimate.p_hat <= 0.5);
    Ok(CertificateReport {
        all_pairs_pass: pairs.iter().all(|p| p.pass),
        pairs,
        bootstrap_holds,
        base_interval: (alpha_min, alpha_min * factor),
        c2,
        decay_exp,
    })
}
