//! Effective decay exponent: numeric slopes of the mark integral, their
//! extrapolation to zero mark cutoff exponent, closed-form classification and
//! phase grids.

mod classify;
mod integral;
mod phase;
mod quad;


use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::ModelSpec;

pub use classify::{analytic_classify, AnalyticClass, Exponent};
pub use integral::{i_integral, i_integral_unchecked};
pub use phase::{phase_grid, phase_svg, with_param, Axis, PhaseCell, PhaseGrid};
pub use quad::{integrate, integrate_pieces};

/// Which side of `1/n` the lower mark cutoff sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Cutoff `n^{-1-μ}`.
    Minus,
    /// Cutoff `n^{-1+μ}`.
    Plus,
}

impl Side {
    fn cutoff(self, n: f64, mu: f64) -> f64 {
        match self {
            Side::Minus => n.powf(-1.0 - mu),
            Side::Plus => n.powf(-1.0 + mu),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiPoint {
    pub mu: f64,
    pub slope: f64,
    pub stderr: f64,
}

pub const MIN_GRID_POINTS: usize = 6;
pub const MIN_GRID_MAX: f64 = 1e6;

/// Nine geometric points from `1e4` to `1e8`.
pub fn default_n_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(4.0 + 0.5 * k as f64)).collect()
}

pub fn default_mus() -> Vec<f64> {
    vec![0.16, 0.08, 0.04, 0.02]
}

fn check_grid(n_grid: &[f64]) -> Result<()> {
    if n_grid.len() < MIN_GRID_POINTS {
        return Err(invalid(format!("n grid needs at least {MIN_GRID_POINTS} points, got {}", n_grid.len())));
    }
    if n_grid.iter().any(|&n| !(n > 1.0) || !n.is_finite()) {
        return Err(invalid("n grid values must be finite and > 1"));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("n grid must be strictly increasing"));
    }
    let max = n_grid[n_grid.len() - 1];
    if max < MIN_GRID_MAX {
        return Err(invalid(format!("n grid must reach {MIN_GRID_MAX:e}, max is {max:e}")));
    }
    Ok(())
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, stderr of b)`.
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let se = if xs.len() > 2 {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (b, a, se)
}

/// Slope of `-ln I(n, cutoff)` against `ln n` over `n_grid`.
pub fn psi_estimate(model: &ModelSpec, mu: f64, side: Side, n_grid: &[f64]) -> Result<PsiPoint> {
    model.validate()?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid(format!("mu must be positive, got {mu}")));
    }
    check_grid(n_grid)?;
    let mut xs = Vec::with_capacity(n_grid.len());
    let mut ys = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let a = side.cutoff(n, mu);
        if !(a < 1.0) {
            return Err(invalid(format!("mark cutoff {a} at n = {n:e} is not below 1; lower mu")));
        }
        let value = i_integral_unchecked(model, n, a)?;
        if !(value > 0.0) {
            return Err(Error::VanishingIntegral(n));
        }
        xs.push(n.ln());
        ys.push(-value.ln());
    }
    let (slope, _, stderr) = ols(&xs, &ys);
    Ok(PsiPoint { mu, slope, stderr })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeffReport {
    pub psi_minus: Vec<PsiPoint>,
    pub psi_plus: Vec<PsiPoint>,
    pub deff_minus_hat: f64,
    pub deff_plus_hat: f64,
    /// `None` when the closed-form classifier declines the parameters.
    pub analytic: Option<AnalyticClass>,
    pub n_grid: Vec<f64>,
}

impl DeffReport {
    /// Midpoint of the two extrapolated exponents.
    pub fn deff_hat(&self) -> f64 {
        0.5 * (self.deff_minus_hat + self.deff_plus_hat)
    }
}

fn extrapolate(points: &[PsiPoint]) -> f64 {
    let mus: Vec<f64> = points.iter().map(|p| p.mu).collect();
    let slopes: Vec<f64> = points.iter().map(|p| p.slope).collect();
    ols(&mus, &slopes).1
}

/// Estimates both slopes for every `μ` and extrapolates each linearly to
/// `μ = 0`.
pub fn deff_estimate(model: &ModelSpec, mus: &[f64], n_grid: &[f64]) -> Result<DeffReport> {
    model.validate()?;
    check_grid(n_grid)?;
    if mus.len() < 3 {
        return Err(invalid(format!("need at least 3 mu values, got {}", mus.len())));
    }
    if mus.windows(2).any(|w| w[1] >= w[0]) || mus[mus.len() - 1] <= 0.0 {
        return Err(invalid("mu values must be positive and strictly decreasing"));
    }
    let jobs: Vec<(Side, f64)> = [Side::Minus, Side::Plus].iter().flat_map(|&s| mus.iter().map(move |&m| (s, m))).collect();
    let points = jobs
        .par_iter()
        .map(|&(side, mu)| psi_estimate(model, mu, side, n_grid))
        .collect::<Result<Vec<_>>>()?;
    let (psi_minus, psi_plus) = points.split_at(mus.len());
    let analytic = match analytic_classify(model) {
        Ok(class) => Some(class),
        Err(Error::NoClosedForm(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(DeffReport {
        deff_minus_hat: extrapolate(psi_minus),
        deff_plus_hat: extrapolate(psi_plus),
        psi_minus: psi_minus.to_vec(),
        psi_plus: psi_plus.to_vec(),
        analytic,
        n_grid: n_grid.to_vec(),
    })
}
