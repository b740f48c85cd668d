//! Bounded regions of R^d and the volume helpers built on them.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};

/// Volume of the unit ball in R^d, `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / gamma(h + 1.0)
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A bounded measurable subset of R^d.
///
/// Balls are open, boxes are half-open `[lo, hi)`, and an annulus is the
/// difference of two open balls, `{ r_inner <= |x - c| < r_outer }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r_inner: f64, r_outer: f64 },
}

impl Region {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let r = Region::Box { lo, hi };
        r.validate()?;
        Ok(r)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let r = Region::Ball { center, radius };
        r.validate()?;
        Ok(r)
    }

    pub fn annulus(center: Vec<f64>, r_inner: f64, r_outer: f64) -> Result<Self> {
        let r = Region::Annulus { center, r_inner, r_outer };
        r.validate()?;
        Ok(r)
    }

    /// Ball of radius `radius` about the origin of R^d.
    pub fn centered_ball(d: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; d], radius)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Region::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(invalid("box corners must have equal positive dimension"));
                }
                if !finite(lo) || !finite(hi) || lo.iter().zip(hi).any(|(a, b)| a >= b) {
                    return Err(invalid("box requires finite corner_lo < corner_hi componentwise"));
                }
            }
            Region::Ball { center, radius } => {
                if center.is_empty() || !finite(center) {
                    return Err(invalid("ball center must be a finite point"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid("ball radius must be positive and finite"));
                }
            }
            Region::Annulus { center, r_inner, r_outer } => {
                if center.is_empty() || !finite(center) {
                    return Err(invalid("annulus center must be a finite point"));
                }
                if !(*r_inner >= 0.0 && r_inner < r_outer && r_outer.is_finite()) {
                    return Err(invalid("annulus requires 0 <= r_inner < r_outer < inf"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } | Region::Annulus { center, .. } => center.len(),
        }
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        let d = self.dim();
        match self {
            Region::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Region::Ball { radius, .. } => unit_ball_volume(d) * radius.powi(d as i32),
            Region::Annulus { r_inner, r_outer, .. } => {
                unit_ball_volume(d) * (r_outer.powi(d as i32) - r_inner.powi(d as i32))
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| v >= a && v < b),
            Region::Ball { center, radius } => dist2(x, center) < radius * radius,
            Region::Annulus { center, r_inner, r_outer } => {
                let q = dist2(x, center);
                q >= r_inner * r_inner && q < r_outer * r_outer
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius: r } | Region::Annulus { center, r_outer: r, .. } => (
                center.iter().map(|c| c - r).collect(),
                center.iter().map(|c| c + r).collect(),
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Region::Box { lo, hi } => norm(&lo.iter().zip(hi).map(|(a, b)| b - a).collect::<Vec<_>>()),
            Region::Ball { radius: r, .. } | Region::Annulus { r_outer: r, .. } => 2.0 * r,
        }
    }

    /// Whether the closed ball `{ |z - c| <= rho }` lies inside the region.
    pub fn contains_ball(&self, c: &[f64], rho: f64) -> bool {
        match self {
            Region::Box { lo, hi } => {
                c.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| v - rho >= *a && v + rho < *b)
            }
            Region::Ball { center, radius } => dist2(c, center).sqrt() + rho < *radius,
            Region::Annulus { center, r_inner, r_outer } => {
                let dc = dist2(c, center).sqrt();
                dc + rho < *r_outer && (*r_inner == 0.0 || dc - rho >= *r_inner)
            }
        }
    }

    /// Distance from an interior point to the region's boundary.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        match self {
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (a, b))| (v - a).min(b - v))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
            Region::Ball { center, radius } => (radius - dist2(x, center).sqrt()).max(0.0),
            Region::Annulus { center, r_inner, r_outer } => {
                let dc = dist2(x, center).sqrt();
                let outer = r_outer - dc;
                if *r_inner > 0.0 {
                    outer.min(dc - r_inner).max(0.0)
                } else {
                    outer.max(0.0)
                }
            }
        }
    }

    /// Region grown by `margin` in every direction (an annulus whose inner
    /// radius would become non-positive turns into a ball).
    pub fn enlarged(&self, margin: f64) -> Region {
        if margin <= 0.0 {
            return self.clone();
        }
        match self {
            Region::Box { lo, hi } => Region::Box {
                lo: lo.iter().map(|v| v - margin).collect(),
                hi: hi.iter().map(|v| v + margin).collect(),
            },
            Region::Ball { center, radius } => Region::Ball { center: center.clone(), radius: radius + margin },
            Region::Annulus { center, r_inner, r_outer } => {
                if *r_inner - margin > 0.0 {
                    Region::Annulus { center: center.clone(), r_inner: r_inner - margin, r_outer: r_outer + margin }
                } else {
                    Region::Ball { center: center.clone(), radius: r_outer + margin }
                }
            }
        }
    }

    /// Volume of `B(c, rho) ∩ region`. Exact for balls and annuli; boxes use a
    /// fixed Halton point set (deterministic, relative error well below 1%).
    pub fn ball_intersection_volume(&self, c: &[f64], rho: f64) -> f64 {
        let d = c.len();
        if rho <= 0.0 {
            return 0.0;
        }
        match self {
            Region::Ball { center, radius } => lens_volume(d, dist2(c, center).sqrt(), rho, *radius),
            Region::Annulus { center, r_inner, r_outer } => {
                let dc = dist2(c, center).sqrt();
                lens_volume(d, dc, rho, *r_outer) - lens_volume(d, dc, rho, *r_inner)
            }
            Region::Box { lo, hi } => {
                let full = unit_ball_volume(d) * rho.powi(d as i32);
                if self.contains_ball(c, rho) {
                    return full;
                }
                let disjoint = c.iter().zip(lo.iter().zip(hi)).any(|(v, (a, b))| v + rho <= *a || v - rho >= *b);
                if disjoint {
                    return 0.0;
                }
                if d == 1 {
                    let a = (c[0] - rho).max(lo[0]);
                    let b = (c[0] + rho).min(hi[0]);
                    return (b - a).max(0.0);
                }
                halton_ball_fraction(c, rho, |p| self.contains(p)) * full
            }
        }
    }
}

/// Volume of a spherical cap of height `h` cut from a ball of radius `r` in R^d.
pub fn cap_volume(d: usize, r: f64, h: f64) -> f64 {
    let full = unit_ball_volume(d) * r.powi(d as i32);
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 2.0 * r {
        return full;
    }
    if h > r {
        return full - cap_volume(d, r, 2.0 * r - h);
    }
    let x = ((2.0 * r * h - h * h) / (r * r)).clamp(0.0, 1.0);
    0.5 * full * beta_reg((d as f64 + 1.0) / 2.0, 0.5, x)
}

/// Volume of the intersection of two balls of radii `r1`, `r2` whose centres
/// are `dist` apart.
pub fn lens_volume(d: usize, dist: f64, r1: f64, r2: f64) -> f64 {
    if r1 <= 0.0 || r2 <= 0.0 || dist >= r1 + r2 {
        return 0.0;
    }
    let small = r1.min(r2);
    if dist <= (r1 - r2).abs() {
        return unit_ball_volume(d) * small.powi(d as i32);
    }
    // Signed distance from the first centre to the radical hyperplane.
    let x1 = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist);
    let h1 = r1 - x1;
    let h2 = r2 - (dist - x1);
    cap_volume(d, r1, h1) + cap_volume(d, r2, h2)
}

const HALTON_POINTS: usize = 1 << 14;
const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Fraction of the ball `B(c, rho)` satisfying `inside`, estimated on Halton
/// points from the bounding cube that fall in the ball.
fn halton_ball_fraction(c: &[f64], rho: f64, inside: impl Fn(&[f64]) -> bool) -> f64 {
    let d = c.len();
    assert!(d <= PRIMES.len(), "Halton volume estimate supports d <= 8");
    let mut p = vec![0.0; d];
    let (mut in_ball, mut hit) = (0usize, 0usize);
    for i in 1..=HALTON_POINTS as u64 {
        for (k, slot) in p.iter_mut().enumerate() {
            *slot = c[k] + rho * (2.0 * radical_inverse(i, PRIMES[k]) - 1.0);
        }
        if dist2(&p, c) < rho * rho {
            in_ball += 1;
            if inside(&p) {
                hit += 1;
            }
        }
    }
    hit as f64 / in_ball as f64
}
