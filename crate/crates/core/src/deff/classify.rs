//! Closed-form effective decay exponents, tail exponents and mixing indices
//! for the two implemented model families.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Profile};

/// A non-negative exponent that may be infinite. Serializes as a number or
/// the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: Exponent) -> Exponent {
        match (self, other) {
            (Exponent::Infinite, x) | (x, Exponent::Infinite) => x,
            (Exponent::Finite(a), Exponent::Finite(b)) => Exponent::Finite(a.min(b)),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_f64(*v),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Ok(Exponent::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                Ok(Exponent::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                Ok(Exponent::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                match v {
                    "inf" => Ok(Exponent::Infinite),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Closed-form verdicts for one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticClass {
    /// `None` where the exponent is not meaningful (`γ + γ' > 1`, where
    /// `λ_c = 0`).
    pub deff_value: Option<Exponent>,
    pub deff_gt2: bool,
    /// Only defined inside the `δ_eff > 2` phase.
    pub mu_bar: Option<Exponent>,
    /// Mixing index; `None` when the model is not known to mix (`ξ >= 1`).
    pub zeta: Option<Exponent>,
}

fn boundary(what: &str) -> Error {
    Error::NoClosedForm(format!("parameters sit on the case boundary {what}"))
}

fn exact_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

pub fn analytic_classify(model: &ModelSpec) -> Result<AnalyticClass> {
    model.validate()?;
    match *model {
        ModelSpec::Wdrcm { profile: Profile::LongRange { delta, .. }, kernel, .. } => {
            long_range(kernel.gamma, kernel.gamma_prime, delta)
        }
        ModelSpec::Wdrcm { profile: Profile::ShortRange { .. }, kernel, .. } => Ok(short_range(kernel.gamma, kernel.gamma_prime)),
        ModelSpec::Interference { gamma, delta, xi, .. } => interference(gamma, delta, xi),
    }
}

fn long_range(gamma: f64, gamma_prime: f64, delta: f64) -> Result<AnalyticClass> {
    let inv = 1.0 / delta;
    if exact_eq(gamma_prime, inv) {
        return Err(boundary("gamma' = 1/delta"));
    }
    let sum = gamma + gamma_prime;
    let (deff, mu_bar) = if gamma_prime < inv {
        if exact_eq(gamma, inv) {
            return Err(boundary("gamma = 1/delta"));
        }
        if gamma < inv {
            (delta, delta - 2.0)
        } else {
            (1.0 + delta - gamma * delta, (delta - 1.0) / (gamma * delta) - 1.0)
        }
    } else {
        if exact_eq(gamma, 2.0 * inv - gamma_prime) {
            return Err(boundary("gamma = 2/delta - gamma'"));
        }
        if gamma < 2.0 * inv - gamma_prime {
            (delta, delta - 2.0)
        } else {
            (delta + 2.0 - delta * sum, delta * (1.0 - sum) / (delta * sum - 1.0))
        }
    };
    let on_transition = exact_eq(deff, 2.0);
    let deff_gt2 = !on_transition && delta > 2.0 && gamma < 1.0 - inv && gamma_prime < 1.0 - gamma;
    let deff_value = if sum > 1.0 && !exact_eq(sum, 1.0) { None } else if on_transition { Some(2.0) } else { Some(deff) };
    Ok(AnalyticClass {
        deff_value: deff_value.map(Exponent::Finite),
        deff_gt2,
        mu_bar: deff_gt2.then_some(Exponent::Finite(mu_bar)),
        zeta: Some(Exponent::Infinite),
    })
}

/// Indicator profile, read off the long-range formulas as `δ → ∞`.
fn short_range(gamma: f64, gamma_prime: f64) -> AnalyticClass {
    let sum = gamma + gamma_prime;
    let (deff_value, deff_gt2, mu_bar) = if exact_eq(sum, 1.0) {
        (Some(Exponent::Finite(2.0)), false, None)
    } else if sum > 1.0 {
        (None, false, None)
    } else {
        let mu_bar = if gamma == 0.0 {
            Exponent::Infinite
        } else if gamma_prime == 0.0 {
            Exponent::Finite(1.0 / gamma - 1.0)
        } else {
            Exponent::Finite((1.0 - sum) / sum)
        };
        (Some(Exponent::Infinite), true, Some(mu_bar))
    };
    AnalyticClass { deff_value, deff_gt2, mu_bar, zeta: Some(Exponent::Infinite) }
}

fn interference(gamma: f64, delta: f64, xi: f64) -> Result<AnalyticClass> {
    let split = (1.0 + xi) / delta;
    if exact_eq(gamma, split) {
        return Err(boundary("gamma = (1 + xi)/delta"));
    }
    let (deff, mu_bar) = if gamma < split {
        (delta, delta - 2.0)
    } else {
        (delta + 1.0 + xi - gamma * delta, (delta * (1.0 - gamma) + xi - 1.0) / (gamma * delta - xi))
    };
    let threshold = (delta + xi - 1.0) / delta;
    let on_transition = exact_eq(gamma, threshold);
    let deff_gt2 = !on_transition && gamma < threshold;
    let zeta = if xi == 0.0 {
        Some(Exponent::Infinite)
    } else if xi < 1.0 {
        Some(Exponent::Finite(1.0 / xi - 1.0))
    } else {
        None
    };
    Ok(AnalyticClass {
        deff_value: Some(Exponent::Finite(if on_transition { 2.0 } else { deff })),
        deff_gt2,
        mu_bar: deff_gt2.then_some(Exponent::Finite(mu_bar)),
        zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Kernel;

    fn lr(g: f64, gp: f64, d: f64) -> Result<AnalyticClass> {
        analytic_classify(&ModelSpec::long_range(g, gp, d).unwrap())
    }

    #[test]
    fn documented_points() {
        let c = lr(0.3, 0.0, 3.0).unwrap();
        assert_eq!(c.deff_value, Some(Exponent::Finite(3.0)));
        assert_eq!(c.mu_bar, Some(Exponent::Finite(1.0)));
        let c = lr(0.5, 0.0, 3.0).unwrap();
        assert_eq!(c.deff_value, Some(Exponent::Finite(2.5)));
        assert!((c.mu_bar.unwrap().value() - 1.0 / 3.0).abs() < 1e-15);
        for g in [0.1, 0.4, 0.7] {
            for d in [1.5, 3.0, 8.0] {
                match lr(g, 1.0 - g, d) {
                    Ok(c) => assert!(!c.deff_gt2),
                    Err(Error::NoClosedForm(_)) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
        assert!(matches!(lr(0.25, 0.1, 4.0), Err(Error::NoClosedForm(_))));
        assert_eq!(lr(0.3, 0.0, 3.0).unwrap().zeta, Some(Exponent::Infinite));
    }

    #[test]
    fn interference_points() {
        let m = |g, d, xi| analytic_classify(&ModelSpec::interference(g, d, xi, 1.0, 2).unwrap()).unwrap();
        assert!(!m(0.65, 2.7, 0.0).deff_gt2);
        assert!(m(0.65, 2.7, 0.3).deff_gt2);
        assert_eq!(m(0.65, 2.7, 0.3).zeta, Some(Exponent::Finite(1.0 / 0.3 - 1.0)));
        assert_eq!(m(0.2, 3.0, 0.0).zeta, Some(Exponent::Infinite));
        assert_eq!(m(0.2, 3.0, 1.5).zeta, None);
        // At ξ = 0 the verdict equals the soft Boolean one.
        for g in [0.1, 0.2, 0.5, 0.6, 0.7, 0.8] {
            let soft = lr(g, 0.0, 3.0).unwrap();
            let inter = m(g, 3.0, 0.0);
            assert_eq!(soft.deff_gt2, inter.deff_gt2);
            assert_eq!(soft.deff_value, inter.deff_value);
        }
    }

    #[test]
    fn short_range_rows() {
        let sr = |g, gp| {
            let m = ModelSpec::wdrcm(Profile::ShortRange { p: 1.0 }, Kernel { gamma: g, gamma_prime: gp }, 1.0).unwrap();
            analytic_classify(&m).unwrap()
        };
        assert_eq!(sr(0.0, 0.0).mu_bar, Some(Exponent::Infinite));
        assert_eq!(sr(0.5, 0.0).mu_bar, Some(Exponent::Finite(1.0)));
        assert!(!sr(0.4, 0.6).deff_gt2);
        assert!(!sr(0.0, 1.2).deff_gt2);
    }

    #[test]
    fn exponent_serde() {
        let s = serde_json::to_string(&[Exponent::Finite(1.5), Exponent::Infinite]).unwrap();
        assert_eq!(s, "[1.5,\"inf\"]");
        let back: Vec<Exponent> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Exponent::Finite(1.5), Exponent::Infinite]);
    }
}
