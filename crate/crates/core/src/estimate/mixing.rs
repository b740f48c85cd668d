use serde::{Deserialize, Serialize};

use crate::deff::{i_integral_unchecked, integrate};
use crate::error::{invalid, Result};
use crate::events::{eval_event, EventSpec};
use crate::graphgen::{sample_graph_with, PairScope, SampleOptions};
use crate::models::ModelSpec;
use crate::pointproc::{unit_ball_volume, Region, RngStream};

use super::{replicate, EstimateOptions};

/// Covariance of the crossing indicators of two distant balls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingEstimate {
    pub cov_hat: f64,
    /// Jackknife standard error.
    pub stderr: f64,
    pub n_reps: u64,
    pub p_origin: f64,
    pub p_far: f64,
}

/// Smallest box around `B(3r, o)` and `B(3r, x)` with `x = separation e_1`.
pub fn mixing_window(d: usize, radius: f64, separation: f64) -> Region {
    let reach = 3.0 * radius;
    let lo = vec![-reach; d];
    let mut hi = vec![reach; d];
    hi[0] = separation + reach;
    Region::Box { lo, hi }
}

/// Joint replications of `G(α, o)` and `G(α, x)` on one shared sample with
/// `|x| = separation`.
pub fn mixing_cov(
    model: &ModelSpec,
    alpha: f64,
    separation: f64,
    lambda: f64,
    n_reps: u64,
    rng: &RngStream,
    opts: &EstimateOptions,
) -> Result<MixingEstimate> {
    let d = opts.dimension;
    let here = EventSpec::g(alpha);
    here.validate(d)?;
    let r = here.radius(d);
    if !(separation > 6.0 * r) {
        return Err(invalid(format!("separation {separation} must exceed 6 alpha^(1/d) = {}", 6.0 * r)));
    }
    if n_reps < 2 {
        return Err(invalid("mixing needs at least two replications"));
    }
    let mut far_center = vec![0.0; d];
    far_center[0] = separation;
    let there = EventSpec::g_at(alpha, far_center.clone());
    let regions = vec![
        Region::Ball { center: vec![0.0; d], radius: 3.0 * r },
        Region::Ball { center: far_center, radius: 3.0 * r },
    ];
    let sample_opts = SampleOptions { policy: opts.policy.clone(), scope: PairScope::WithinAny { regions }, ..Default::default() };
    let window = mixing_window(d, r, separation);
    let pairs = replicate(n_reps, rng, |s| {
        let g = sample_graph_with(model, &window, lambda, s, &sample_opts, false)?;
        Ok((f64::from(u8::from(eval_event(&g, &here)?)), f64::from(u8::from(eval_event(&g, &there)?))))
    })?;

    let n = n_reps as f64;
    let (sa, sb, sab) = pairs.iter().fold((0.0, 0.0, 0.0), |(sa, sb, sab), (a, b)| (sa + a, sb + b, sab + a * b));
    let cov_hat = sab / n - (sa / n) * (sb / n);
    let loo: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| (sab - a * b) / (n - 1.0) - ((sa - a) / (n - 1.0)) * ((sb - b) / (n - 1.0)))
        .collect();
    let mean_loo = loo.iter().sum::<f64>() / n;
    let stderr = ((n - 1.0) / n * loo.iter().map(|c| (c - mean_loo).powi(2)).sum::<f64>()).sqrt();
    Ok(MixingEstimate { cov_hat, stderr, n_reps, p_origin: sa / n, p_far: sb / n })
}

/// Upper bound on the expected number of edges between `B(2r)` and the
/// part of `B(3r)^c` beyond the truncation radius `truncation * r`:
/// `λ² ω_d (2r)^d ∫_{Kr}^∞ d ω_d ρ^{d-1} Φ((ρ - 2r)^d) dρ`, with `Φ` the
/// mark-averaged connection function.
pub fn h_truncation_mass(model: &ModelSpec, alpha: f64, truncation: f64, lambda: f64, d: usize) -> Result<f64> {
    if !(truncation > 3.0) {
        return Err(invalid(format!("truncation {truncation} must exceed 3")));
    }
    let r = alpha.powf(1.0 / d as f64);
    let omega = unit_ball_volume(d);
    let start = truncation * r;
    // ρ = start · e^u, dρ = ρ du.
    let radial = integrate(
        |u| {
            let rho = start * u.exp();
            let phi_bar = i_integral_unchecked(model, (rho - 2.0 * r).powi(d as i32), 1e-12).unwrap_or(f64::NAN);
            d as f64 * omega * rho.powi(d as i32) * phi_bar
        },
        0.0,
        60.0,
        1e-6,
    )?;
    Ok(lambda * lambda * omega * (2.0 * r).powi(d as i32) * radial)
}
