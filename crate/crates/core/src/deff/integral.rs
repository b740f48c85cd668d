//! The mark integral `I(n, a) = ∫_a^1 ∫_a^1 φ(s, t, n) ds dt`.
//!
//! By symmetry `I = 2 ∫_a^1 K(s) ds` with `K(s) = ∫_s^1 φ(s, t, n) dt`. For the
//! random connection family `K` is a sum of power functions and is evaluated
//! in closed form; with interference `φ` depends on the smaller mark only and
//! `K(s) = (1 - s) φ(s, s, n)`. The outer integral runs in `u = ln s`, split
//! where `φ` stops being clipped at its maximum.

use crate::error::{invalid, Result};
use crate::models::{poisson_reciprocal_mean, ModelSpec, Profile};
use crate::pointproc::unit_ball_volume;

use super::quad::integrate_pieces;

pub const REL_TOL: f64 = 1e-6;

/// `∫_L^1 t^{-e} dt` for `ln_l = ln L <= 0`.
fn power_tail(e: f64, ln_l: f64) -> f64 {
    let k = 1.0 - e;
    if k.abs() < 1e-12 {
        -ln_l
    } else {
        -(k * ln_l).exp_m1() / k
    }
}

/// `∫_s^1 ρ(c s^γ t^γ') dt` with `ln_c = ln(n / β)`.
fn inner_wdrcm(profile: &Profile, gamma: f64, gamma_prime: f64, ln_c: f64, ln_s: f64) -> f64 {
    let s = ln_s.exp();
    let p = profile.p();
    let ln_base = ln_c + gamma * ln_s;
    // Log of the largest t at which the profile is still clipped at p.
    let ln_t_clip = if gamma_prime > 0.0 {
        -ln_base / gamma_prime
    } else if ln_base <= 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    let ln_l = ln_t_clip.clamp(ln_s, 0.0);
    let clipped = p * (ln_l.exp() - s).max(0.0);
    let tail = match profile {
        Profile::ShortRange { .. } => 0.0,
        Profile::LongRange { delta, .. } => {
            if ln_l >= 0.0 {
                0.0
            } else {
                p * (-delta * ln_base).exp() * power_tail(gamma_prime * delta, ln_l)
            }
        }
    };
    clipped + tail
}

/// Kinks of the outer integrand in `u = ln s`, restricted to `(ln a, 0)`.
fn breaks(ln_a: f64, kinks: &[f64]) -> Vec<f64> {
    let mut b = vec![ln_a];
    let mut inner: Vec<f64> = kinks.iter().copied().filter(|k| k.is_finite() && *k > ln_a && *k < 0.0).collect();
    inner.sort_by(f64::total_cmp);
    b.extend(inner);
    b.push(0.0);
    b
}

/// `I(n, a)` for any `n > 0` and `0 < a < 1`.
pub fn i_integral_unchecked(model: &ModelSpec, n: f64, a: f64) -> Result<f64> {
    let ln_a = a.ln();
    let ln_n = n.ln();
    let half = match *model {
        ModelSpec::Wdrcm { profile, kernel, beta } => {
            let (g, gp) = (kernel.gamma, kernel.gamma_prime);
            let ln_c = ln_n - beta.ln();
            let kinks = [
                if g > 0.0 { -ln_c / g } else { f64::NAN },
                if g + gp > 0.0 { -ln_c / (g + gp) } else { f64::NAN },
            ];
            integrate_pieces(
                |u| u.exp() * inner_wdrcm(&profile, g, gp, ln_c, u),
                &breaks(ln_a, &kinks),
                REL_TOL * 0.1,
            )?
        }
        ModelSpec::Interference { gamma, delta, xi, lambda_env, dimension } => {
            let scale = lambda_env * unit_ball_volume(dimension);
            let kink = if gamma > 0.0 { -ln_n / gamma } else { f64::NAN };
            integrate_pieces(
                |u| {
                    let v = u.exp();
                    let clip = (-gamma * delta * u - delta * ln_n).min(0.0).exp();
                    v * (1.0 - v) * clip * poisson_reciprocal_mean(scale * (-xi * u).exp())
                },
                &breaks(ln_a, &[kink]),
                REL_TOL * 0.1,
            )?
        }
    };
    Ok(2.0 * half)
}

/// `∫_a^1 ∫_a^1 φ(s, t, n) ds dt`.
pub fn i_integral(model: &ModelSpec, n: f64, a: f64) -> Result<f64> {
    model.validate()?;
    if !(n > 1.0 && n.is_finite()) {
        return Err(invalid(format!("n = {n} must be finite and > 1")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid(format!("mark cutoff a = {a} must lie in (0, 1)")));
    }
    i_integral_unchecked(model, n, a)
}
