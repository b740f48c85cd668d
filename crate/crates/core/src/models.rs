//! Connection functions: profiles, the interpolation kernel, the annealed
//! function φ(s, t, r) and the quenched edge probability including local
//! interference.
//!
//! Throughout, the distance argument `r` of φ is the d-th power of the
//! Euclidean distance, `|x - y|^d`. [`distance_power`] is the only place where
//! that conversion happens.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pointproc::{dist2, unit_ball_volume, MarkedPoint, PointCloud};

/// Distance profile ρ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `p (1 ∧ x^{-δ})`
    LongRange { p: f64, delta: f64 },
    /// `p 1{0 <= x <= 1}`
    ShortRange { p: f64 },
}

impl Profile {
    pub fn p(&self) -> f64 {
        match *self {
            Profile::LongRange { p, .. } | Profile::ShortRange { p } => p,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match *self {
            Profile::LongRange { delta, .. } => Some(delta),
            Profile::ShortRange { .. } => None,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::LongRange { p, delta } => {
                if x <= 1.0 {
                    p
                } else {
                    p * x.powf(-delta)
                }
            }
            Profile::ShortRange { p } => {
                if x <= 1.0 {
                    p
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let p = self.p();
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid(format!("profile p = {p} must lie in (0, 1]")));
        }
        if let Some(delta) = self.delta() {
            if !(delta > 1.0 && delta.is_finite()) {
                return Err(invalid(format!("long-range profile needs delta > 1, got {delta}")));
            }
        }
        Ok(())
    }
}

/// Interpolation kernel `g(s, t) = (s ∧ t)^γ (s ∨ t)^{γ'}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernel {
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl Kernel {
    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let (lo, hi) = if s < t { (s, t) } else { (t, s) };
        let pow = |x: f64, e: f64| if e == 0.0 { 1.0 } else { x.powf(e) };
        pow(lo, self.gamma) * pow(hi, self.gamma_prime)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(invalid(format!("gamma = {} must lie in [0, 1)", self.gamma)));
        }
        if !(self.gamma_prime >= 0.0 && self.gamma_prime < 2.0 - self.gamma) {
            return Err(invalid(format!(
                "gamma' = {} must lie in [0, 2 - gamma)",
                self.gamma_prime
            )));
        }
        Ok(())
    }
}

/// A connection mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Weight-dependent random connection model, `ρ(β^{-1} g(s, t) r)`.
    Wdrcm { profile: Profile, kernel: Kernel, beta: f64 },
    /// Soft Boolean model with local interference. `dimension` enters the
    /// annealed φ through the volume of the interference ball.
    Interference { gamma: f64, delta: f64, xi: f64, lambda_env: f64, dimension: usize },
}

impl ModelSpec {
    pub fn wdrcm(profile: Profile, kernel: Kernel, beta: f64) -> Result<Self> {
        let m = ModelSpec::Wdrcm { profile, kernel, beta };
        m.validate()?;
        Ok(m)
    }

    /// Long-range interpolation-kernel model with `p = β = 1`.
    pub fn long_range(gamma: f64, gamma_prime: f64, delta: f64) -> Result<Self> {
        Self::wdrcm(Profile::LongRange { p: 1.0, delta }, Kernel { gamma, gamma_prime }, 1.0)
    }

    pub fn interference(gamma: f64, delta: f64, xi: f64, lambda_env: f64, dimension: usize) -> Result<Self> {
        let m = ModelSpec::Interference { gamma, delta, xi, lambda_env, dimension };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Wdrcm { profile, kernel, beta } => {
                profile.validate()?;
                kernel.validate()?;
                if !(*beta > 0.0 && beta.is_finite()) {
                    return Err(invalid(format!("beta = {beta} must be positive")));
                }
            }
            ModelSpec::Interference { gamma, delta, xi, lambda_env, dimension } => {
                if !(0.0..1.0).contains(gamma) {
                    return Err(invalid(format!("gamma = {gamma} must lie in [0, 1)")));
                }
                if !(*delta > 2.0 && delta.is_finite()) {
                    return Err(invalid(format!("interference model needs delta > 2, got {delta}")));
                }
                if !(*xi >= 0.0 && xi.is_finite()) {
                    return Err(invalid(format!("xi = {xi} must be >= 0")));
                }
                if !(*lambda_env > 0.0 && lambda_env.is_finite()) {
                    return Err(invalid(format!("lambda_env = {lambda_env} must be positive")));
                }
                if *dimension == 0 {
                    return Err(invalid("dimension must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Whether edges ignore the surrounding vertices (mixing index ζ = ∞).
    pub fn is_environment_free(&self) -> bool {
        matches!(self, ModelSpec::Wdrcm { .. })
    }

    /// Interference exponent ξ, zero for the environment-free family.
    pub fn xi(&self) -> f64 {
        match *self {
            ModelSpec::Interference { xi, .. } => xi,
            ModelSpec::Wdrcm { .. } => 0.0,
        }
    }

    /// Length scale beyond which a mark-free edge stops being certain
    /// (`β^{1/d}` for the random connection family, 1 with interference).
    pub fn interaction_scale(&self, d: usize) -> f64 {
        match *self {
            ModelSpec::Wdrcm { beta, .. } => beta.powf(1.0 / d as f64),
            ModelSpec::Interference { .. } => 1.0,
        }
    }

    /// Annealed connection function φ(s, t, r) with `r = |x - y|^d`.
    pub fn phi(&self, s: f64, t: f64, r: f64) -> f64 {
        match *self {
            ModelSpec::Wdrcm { profile, kernel, beta } => profile.eval(kernel.eval(s, t) * r / beta),
            ModelSpec::Interference { gamma, delta, xi, lambda_env, dimension } => {
                let v = s.min(t);
                let m = lambda_env * unit_ball_volume(dimension) * v.powf(-xi);
                clipped_power(v, gamma * delta, r, delta) * poisson_reciprocal_mean(m)
            }
        }
    }

    /// Quenched probability given the interference counts `n_x = N^ξ(x, env)`
    /// and `n_y = N^ξ(y, env)` (only the lower-marked endpoint's count is used).
    #[inline]
    pub fn quenched(&self, r: f64, ux: f64, uy: f64, n_x: usize, n_y: usize) -> f64 {
        match *self {
            ModelSpec::Wdrcm { .. } => self.phi(ux, uy, r),
            ModelSpec::Interference { gamma, delta, .. } => {
                if uy < ux {
                    clipped_power(uy, gamma * delta, r, delta) / (1.0 + n_y as f64)
                } else {
                    clipped_power(ux, gamma * delta, r, delta) / (1.0 + n_x as f64)
                }
            }
        }
    }

    /// d-th power of the interference radius of a vertex with mark `u`.
    pub fn interference_radius_pow(&self, u: f64) -> f64 {
        u.powf(-self.xi())
    }

    /// Upper bound on the edge probability of any pair whose marks are at
    /// least `ma` and `mb` and whose distance power is at least `r`.
    pub fn pair_upper_bound(&self, ma: f64, mb: f64, r: f64) -> f64 {
        match *self {
            ModelSpec::Wdrcm { profile, kernel, beta } => profile.eval(kernel.eval(ma, mb) * r / beta),
            ModelSpec::Interference { gamma, delta, .. } => clipped_power(ma.min(mb), gamma * delta, r, delta),
        }
    }
}

/// `1 ∧ v^{-a} r^{-δ}` evaluated in log space.
#[inline]
fn clipped_power(v: f64, a: f64, r: f64, delta: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    let e = -a * v.ln() - delta * r.ln();
    if e >= 0.0 {
        1.0
    } else {
        e.exp()
    }
}

/// `E[1 / (1 + Poisson(m))] = (1 - e^{-m}) / m`.
pub fn poisson_reciprocal_mean(m: f64) -> f64 {
    if m < 1e-8 {
        1.0 - m / 2.0
    } else {
        -(-m).exp_m1() / m
    }
}

/// `|x - y|^d`.
#[inline]
pub fn distance_power(x: &[f64], y: &[f64]) -> f64 {
    power_from_squared(dist2(x, y), x.len())
}

/// `q^{d/2}`: the distance power from a squared Euclidean distance.
#[inline]
pub(crate) fn power_from_squared(q: f64, d: usize) -> f64 {
    match d {
        1 => q.sqrt(),
        2 => q,
        3 => q * q.sqrt(),
        4 => q * q,
        d => q.powf(d as f64 / 2.0),
    }
}

/// `N^ξ(v, env)`: points of `env` in the closed interference ball of `v`.
pub fn interferers(model: &ModelSpec, v: &MarkedPoint, env: &PointCloud) -> usize {
    let d = v.location.len();
    let radius = model.interference_radius_pow(v.mark).powf(1.0 / d as f64);
    env.count_closed(&v.location, radius, None)
}

/// Quenched edge probability of `x` and `y` given the rest of the
/// configuration `env` (which must exclude both endpoints).
pub fn conn_prob(model: &ModelSpec, x: &MarkedPoint, y: &MarkedPoint, env: &PointCloud) -> f64 {
    let r = distance_power(&x.location, &y.location);
    match model {
        ModelSpec::Wdrcm { .. } => model.phi(x.mark, y.mark, r),
        ModelSpec::Interference { .. } => {
            let (n_x, n_y) = if y.mark < x.mark { (0, interferers(model, y, env)) } else { (interferers(model, x, env), 0) };
            model.quenched(r, x.mark, y.mark, n_x, n_y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_poisson, Region, RngStream};
    use proptest::prelude::*;

    fn short() -> ModelSpec {
        ModelSpec::wdrcm(Profile::ShortRange { p: 1.0 }, Kernel { gamma: 0.0, gamma_prime: 0.0 }, 1.0).unwrap()
    }

    #[test]
    fn profile_examples() {
        assert_eq!(short().phi(0.3, 0.6, 0.5), 1.0);
        assert_eq!(short().phi(0.3, 0.6, 2.0), 0.0);
        let lr = ModelSpec::long_range(0.0, 0.0, 3.0).unwrap();
        assert_eq!(lr.phi(0.2, 0.9, 4.0), 0.015625);
    }

    #[test]
    fn poisson_reciprocal_series() {
        let m: f64 = 2.0;
        let mut term = (-m).exp();
        let mut series = 0.0;
        for k in 0..=60u32 {
            if k > 0 {
                term *= m / k as f64;
            }
            series += term / (k as f64 + 1.0);
        }
        let closed = poisson_reciprocal_mean(m);
        assert!((closed - 0.43233235838169365).abs() < 1e-12);
        assert!((closed - series).abs() < 1e-10);
        assert!((poisson_reciprocal_mean(1e-12) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn construction_errors() {
        assert!(ModelSpec::long_range(1.0, 0.0, 3.0).is_err());
        assert!(ModelSpec::long_range(0.5, 1.5, 3.0).is_err());
        assert!(ModelSpec::long_range(0.5, 0.0, 1.0).is_err());
        assert!(ModelSpec::interference(0.5, 2.0, 0.1, 1.0, 2).is_err());
        assert!(ModelSpec::interference(0.5, 3.0, -0.1, 1.0, 2).is_err());
        assert!(ModelSpec::wdrcm(Profile::ShortRange { p: 0.0 }, Kernel { gamma: 0.0, gamma_prime: 0.0 }, 1.0).is_err());
    }

    #[test]
    fn wdrcm_ignores_environment() {
        let m = ModelSpec::long_range(0.4, 0.2, 2.5).unwrap();
        let x = MarkedPoint::new(vec![0.0, 0.0], 0.3).unwrap();
        let y = MarkedPoint::new(vec![1.5, 0.5], 0.7).unwrap();
        let env = crate::pointproc::sample_poisson(&Region::centered_ball(2, 5.0).unwrap(), 3.0, &RngStream::root(1)).unwrap();
        assert_eq!(conn_prob(&m, &x, &y, &env), conn_prob(&m, &x, &y, &PointCloud::empty(2)));
    }

    #[test]
    fn interference_examples() {
        let m = ModelSpec::interference(0.5, 3.0, 0.0, 1.0, 2).unwrap();
        let x = MarkedPoint::new(vec![0.0, 0.0], 0.8).unwrap();
        let y = MarkedPoint::new(vec![1.2, 0.0], 0.2).unwrap();
        let r: f64 = 1.44;
        let expect = (0.2f64.powf(-1.5) * r.powf(-3.0)).min(1.0);
        assert!((conn_prob(&m, &x, &y, &PointCloud::empty(2)) - expect).abs() < 1e-15);

        // Three interferers within distance 1 of the lower-marked vertex, numerator clipped.
        let close = MarkedPoint::new(vec![0.5, 0.0], 0.8).unwrap();
        let low = MarkedPoint::new(vec![0.0, 0.0], 0.1).unwrap();
        let env = PointCloud::from_points(
            2,
            &[
                MarkedPoint::new(vec![-0.5, 0.0], 0.5).unwrap(),
                MarkedPoint::new(vec![0.0, 0.5], 0.5).unwrap(),
                MarkedPoint::new(vec![0.0, -0.9], 0.5).unwrap(),
                MarkedPoint::new(vec![3.0, 3.0], 0.5).unwrap(),
            ],
            None,
        )
        .unwrap();
        assert_eq!(conn_prob(&m, &close, &low, &env), 0.25);
        assert_eq!(conn_prob(&m, &low, &close, &env), 0.25);
    }

    fn models() -> Vec<ModelSpec> {
        vec![
            ModelSpec::long_range(0.0, 0.0, 3.0).unwrap(),
            ModelSpec::long_range(0.5, 0.3, 2.5).unwrap(),
            ModelSpec::wdrcm(Profile::ShortRange { p: 0.7 }, Kernel { gamma: 0.3, gamma_prime: 0.5 }, 2.0).unwrap(),
            ModelSpec::interference(0.65, 2.7, 0.3, 1.0, 2).unwrap(),
            ModelSpec::interference(0.2, 4.0, 0.0, 0.5, 3).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn phi_symmetric_bounded_monotone(s in 1e-6f64..1.0, t in 1e-6f64..1.0, r in 1e-3f64..1e4, f in 1.0f64..10.0) {
            for m in models() {
                let a = m.phi(s, t, r);
                prop_assert_eq!(a, m.phi(t, s, r));
                prop_assert!((0.0..=1.0).contains(&a));
                prop_assert!(m.phi(s, t, r * f) <= a);
            }
        }

        #[test]
        fn upper_bound_dominates(s in 1e-6f64..1.0, t in 1e-6f64..1.0, ds in 0.0f64..1.0, dt in 0.0f64..1.0, r in 0.0f64..100.0, dr in 0.0f64..10.0) {
            for m in models() {
                let (ma, mb) = (s * ds.max(1e-9), t * dt.max(1e-9));
                prop_assert!(m.pair_upper_bound(ma, mb, r) >= m.quenched(r + dr, s, t, 0, 0));
            }
        }

        #[test]
        fn conn_prob_symmetric(ux in 0.01f64..0.99, uy in 0.01f64..0.99, px in -2.0f64..2.0, py in -2.0f64..2.0) {
            prop_assume!((ux - uy).abs() > 1e-9);
            let env = crate::pointproc::sample_poisson(&Region::centered_ball(2, 6.0).unwrap(), 1.0, &RngStream::root(2)).unwrap();
            let x = MarkedPoint::new(vec![px, 0.0], ux).unwrap();
            let y = MarkedPoint::new(vec![0.0, py], uy).unwrap();
            for m in models().into_iter().filter(|m| matches!(m, ModelSpec::Interference { dimension: 2, .. })) {
                prop_assert_eq!(conn_prob(&m, &x, &y, &env), conn_prob(&m, &y, &x, &env));
            }
        }
    }

    /// `∫₀¹∫₀¹∫₀^R φ dr ds dt` with marks integrated in log space and the
    /// distance integral split where φ leaves its plateau.
    fn truncated_degree(m: &ModelSpec, big_r: f64) -> f64 {
        use crate::deff::integrate_pieces;
        let lo = (1e-14f64).ln();
        let plateau_end = |s: f64, t: f64| match *m {
            ModelSpec::Wdrcm { kernel, beta, .. } => beta / kernel.eval(s, t),
            ModelSpec::Interference { gamma, .. } => s.min(t).powf(-gamma),
        };
        let over_r = |s: f64, t: f64| {
            let k = plateau_end(s, t).min(big_r);
            integrate_pieces(|r| m.phi(s, t, r), &[0.0, k, big_r], 1e-7).unwrap()
        };
        let over_t = |us: f64| {
            let s = us.exp();
            integrate_pieces(|ut| ut.exp() * over_r(s, ut.exp()), &[lo, us, 0.0], 1e-6).unwrap()
        };
        integrate_pieces(|us| us.exp() * over_t(us), &[lo, 0.0], 1e-5).unwrap()
    }

    #[test]
    fn expected_degree_integral_converges() {
        let matrix = [
            ModelSpec::long_range(0.0, 0.0, 3.0).unwrap(),
            ModelSpec::long_range(0.5, 0.0, 3.0).unwrap(),
            ModelSpec::long_range(0.3, 0.4, 2.5).unwrap(),
            ModelSpec::wdrcm(Profile::LongRange { p: 0.5, delta: 4.0 }, Kernel { gamma: 0.2, gamma_prime: 1.1 }, 2.0).unwrap(),
            ModelSpec::wdrcm(Profile::ShortRange { p: 1.0 }, Kernel { gamma: 0.6, gamma_prime: 0.3 }, 1.0).unwrap(),
            ModelSpec::interference(0.5, 3.0, 0.3, 1.0, 2).unwrap(),
            ModelSpec::interference(0.2, 4.0, 0.0, 2.0, 3).unwrap(),
        ];
        for m in &matrix {
            let values: Vec<f64> = [4096.0, 8192.0, 16384.0].iter().map(|&r| truncated_degree(m, r)).collect();
            assert!(values[0] > 0.0 && values.iter().all(|v| v.is_finite()), "{m:?}: {values:?}");
            for w in values.windows(2) {
                assert!((w[1] / w[0] - 1.0).abs() < 0.01, "{m:?}: {values:?}");
            }
        }
    }

    #[test]
    fn interference_is_annealed_average_of_quenched() {
        let cases = [(0.5, 3.0, 0.3, 1.0, 0.3, 0.7, 1.1), (0.2, 2.5, 0.8, 0.5, 0.6, 0.15, 0.4), (0.7, 4.0, 0.0, 2.0, 0.5, 0.5, 0.9)];
        for (k, &(gamma, delta, xi, lambda_env, ux, uy, dist)) in cases.iter().enumerate() {
            let m = ModelSpec::interference(gamma, delta, xi, lambda_env, 2).unwrap();
            let x = MarkedPoint::new(vec![0.0, 0.0], ux).unwrap();
            let y = MarkedPoint::new(vec![dist, 0.0], uy).unwrap();
            let reach = m.interference_radius_pow(f64::min(ux, uy)).sqrt();
            let window = Region::ball(vec![0.0, 0.0], dist + reach + 1.0).unwrap();
            let reps = 20_000u64;
            let root = RngStream::root(4242 + k as u64);
            let draws: Vec<f64> = (0..reps)
                .map(|r| conn_prob(&m, &x, &y, &sample_poisson(&window, lambda_env, &root.replication(r)).unwrap()))
                .collect();
            let mean = draws.iter().sum::<f64>() / reps as f64;
            let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            let want = m.phi(ux, uy, distance_power(&x.location, &y.location));
            assert!((mean - want).abs() <= 3.0 * se, "case {k}: {mean} vs {want} (se {se})");
        }
    }
}
