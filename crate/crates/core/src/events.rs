//! Crossing and long-edge events, cluster exploration and Palm cluster
//! statistics on realized graphs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graphgen::{sample_graph_with, GraphSample, PairScope, SampleOptions, WindowPolicy, Zone};
use crate::models::{distance_power, ModelSpec};
use crate::pointproc::{dist2, norm, Region, RngStream};

/// Exterior truncation radius for H and E, in units of `α^{1/d}`.
pub const DEFAULT_TRUNCATION: f64 = 10.0;

fn default_truncation() -> f64 {
    DEFAULT_TRUNCATION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventSpec {
    /// A vertex of `B(r, c)` reaches, inside `B(3r, c)`, a vertex outside `B(2r, c)`.
    G {
        alpha: f64,
        /// Defaults to the origin.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// An edge from `B(r)` to the annulus `2r <= |x| < 3r`.
    Gprime { alpha: f64 },
    /// An edge from `B(2r)` to `|x| >= 3r`; the exterior is sampled up to
    /// `truncation * r`.
    H {
        alpha: f64,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
    /// An edge inside `B(20r)` with `|x - y|^d >= α`.
    F { alpha: f64 },
    /// The palm vertex has a neighbor with `|x|^d >= α`, searched up to
    /// `truncation * r`.
    E {
        alpha: f64,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
}

impl EventSpec {
    pub fn g(alpha: f64) -> Self {
        EventSpec::G { alpha, center: None }
    }

    pub fn g_at(alpha: f64, center: Vec<f64>) -> Self {
        EventSpec::G { alpha, center: Some(center) }
    }

    pub fn h(alpha: f64) -> Self {
        EventSpec::H { alpha, truncation: DEFAULT_TRUNCATION }
    }

    pub fn e(alpha: f64) -> Self {
        EventSpec::E { alpha, truncation: DEFAULT_TRUNCATION }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            EventSpec::G { alpha, .. }
            | EventSpec::Gprime { alpha }
            | EventSpec::H { alpha, .. }
            | EventSpec::F { alpha }
            | EventSpec::E { alpha, .. } => alpha,
        }
    }

    /// Same event family at another scale.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut e = self.clone();
        match &mut e {
            EventSpec::G { alpha: a, .. }
            | EventSpec::Gprime { alpha: a }
            | EventSpec::H { alpha: a, .. }
            | EventSpec::F { alpha: a }
            | EventSpec::E { alpha: a, .. } => *a = alpha,
        }
        e
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventSpec::G { .. } => "G",
            EventSpec::Gprime { .. } => "Gprime",
            EventSpec::H { .. } => "H",
            EventSpec::F { .. } => "F",
            EventSpec::E { .. } => "E",
        }
    }

    pub fn needs_palm(&self) -> bool {
        matches!(self, EventSpec::E { .. })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let alpha = self.alpha();
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha = {alpha} must be finite and > 1")));
        }
        match self {
            EventSpec::G { center: Some(c), .. } if c.len() != d => {
                Err(invalid(format!("event center has {} coordinates, expected {d}", c.len())))
            }
            EventSpec::H { truncation, .. } if !(*truncation > 3.0 && truncation.is_finite()) => {
                Err(invalid(format!("H truncation = {truncation} must exceed 3")))
            }
            EventSpec::E { truncation, .. } if !(*truncation > 1.0 && truncation.is_finite()) => {
                Err(invalid(format!("E truncation = {truncation} must exceed 1")))
            }
            _ => Ok(()),
        }
    }

    /// `α^{1/d}`.
    pub fn radius(&self, d: usize) -> f64 {
        self.alpha().powf(1.0 / d as f64)
    }

    pub fn center(&self, d: usize) -> Vec<f64> {
        match self {
            EventSpec::G { center: Some(c), .. } => c.clone(),
            _ => vec![0.0; d],
        }
    }

    /// Ball the sampled window has to cover.
    pub fn required_ball(&self, d: usize) -> (Vec<f64>, f64) {
        let r = self.radius(d);
        let factor = match *self {
            EventSpec::G { .. } | EventSpec::Gprime { .. } => 3.0,
            EventSpec::H { truncation, .. } | EventSpec::E { truncation, .. } => truncation,
            EventSpec::F { .. } => 20.0,
        };
        (self.center(d), factor * r)
    }

    /// Default sampling window: exactly the required ball.
    pub fn window(&self, d: usize) -> Region {
        let (c, rho) = self.required_ball(d);
        Region::Ball { center: c, radius: rho }
    }

    /// Pairs an evaluation looks at.
    pub fn scope(&self, d: usize) -> PairScope {
        let r = self.radius(d);
        let c = self.center(d);
        match self {
            EventSpec::G { .. } => PairScope::WithinAny { regions: vec![Region::Ball { center: c, radius: 3.0 * r }] },
            EventSpec::Gprime { .. } => PairScope::Between {
                first: Zone::Region(Region::Ball { center: c.clone(), radius: r }),
                second: Zone::Region(Region::Annulus { center: c, r_inner: 2.0 * r, r_outer: 3.0 * r }),
            },
            EventSpec::H { .. } => PairScope::Between {
                first: Zone::Region(Region::Ball { center: c.clone(), radius: 2.0 * r }),
                second: Zone::Exterior { center: c, radius: 3.0 * r },
            },
            EventSpec::F { alpha } => PairScope::LongEdges { min_len_pow: *alpha },
            EventSpec::E { .. } => PairScope::PalmIncident,
        }
    }
}

/// Whether `window` contains the open ball `B(rho, c)`.
pub fn window_covers_ball(window: &Region, c: &[f64], rho: f64) -> bool {
    let slack = 1e-12 * (1.0 + rho);
    match window {
        Region::Box { lo, hi } => c.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| v - rho >= *a - slack && v + rho <= *b + slack),
        Region::Ball { center, radius } => dist2(c, center).sqrt() + rho <= radius + slack,
        Region::Annulus { center, r_inner, r_outer } => {
            let dc = dist2(c, center).sqrt();
            dc + rho <= r_outer + slack && (*r_inner == 0.0 || dc - rho >= r_inner - slack)
        }
    }
}

/// Samples a graph suited to evaluating `event`.
pub fn sample_for_event(
    model: &ModelSpec,
    event: &EventSpec,
    d: usize,
    lambda: f64,
    rng: &RngStream,
    policy: &WindowPolicy,
) -> Result<GraphSample> {
    event.validate(d)?;
    let opts = SampleOptions { policy: policy.clone(), scope: event.scope(d), ..Default::default() };
    sample_graph_with(model, &event.window(d), lambda, rng, &opts, event.needs_palm())
}

/// Connected component of `start` in the subgraph induced by the vertices
/// located in `domain`, in ascending index order.
pub fn explore_cluster(g: &GraphSample, start: usize, domain: &Region) -> Result<Vec<usize>> {
    if start >= g.len() || !domain.contains(g.cloud().location(start)) {
        return Err(Error::StartOutsideDomain(start));
    }
    let mut seen = vec![false; g.len()];
    let mut out = bfs(g, &[start], |i| domain.contains(g.cloud().location(i)), &mut seen);
    out.sort_unstable();
    Ok(out)
}

fn bfs(g: &GraphSample, starts: &[usize], allowed: impl Fn(usize) -> bool, seen: &mut [bool]) -> Vec<usize> {
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    for &s in starts {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        out.push(v);
        for &w in g.neighbors(v) {
            let w = w as usize;
            if !seen[w] && allowed(w) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    out
}

/// Exact indicator of `event` on the realized graph.
pub fn eval_event(g: &GraphSample, event: &EventSpec) -> Result<bool> {
    let d = g.dim();
    event.validate(d)?;
    let need = event.scope(d);
    if !g.scope().covers(&need) {
        return Err(Error::ScopeMismatch { have: format!("{:?}", g.scope()), need: format!("{need:?}") });
    }
    let (c, rho) = event.required_ball(d);
    if !window_covers_ball(g.window(), &c, rho) {
        return Err(Error::WindowTooSmall(format!(
            "{} needs a window covering the ball of radius {rho} around {c:?}",
            event.name()
        )));
    }
    let cloud = g.cloud();
    let r = event.radius(d);
    let dist = |i: usize| dist2(cloud.location(i), &c).sqrt();
    let any_edge = |pred: &dyn Fn(usize, usize) -> bool| g.edges().any(|(i, j)| pred(i, j) || pred(j, i));
    let outcome = match event {
        EventSpec::G { .. } => {
            let starts: Vec<usize> = (0..g.len()).filter(|&i| dist(i) < r).collect();
            let mut seen = vec![false; g.len()];
            bfs(g, &starts, |i| dist(i) < 3.0 * r, &mut seen).into_iter().any(|i| dist(i) >= 2.0 * r)
        }
        EventSpec::Gprime { .. } => any_edge(&|i, j| dist(i) < r && dist(j) >= 2.0 * r && dist(j) < 3.0 * r),
        EventSpec::H { .. } => any_edge(&|i, j| dist(i) < 2.0 * r && dist(j) >= 3.0 * r),
        EventSpec::F { alpha } => {
            any_edge(&|i, j| i < j && dist(i) < 20.0 * r && dist(j) < 20.0 * r && distance_power(cloud.location(i), cloud.location(j)) >= *alpha)
        }
        EventSpec::E { alpha, .. } => {
            let p = g.palm_index().ok_or(Error::MissingPalm)?;
            g.neighbors(p).iter().any(|&j| distance_power(cloud.location(j as usize), &c) >= *alpha)
        }
    };
    Ok(outcome)
}

/// Size and reach of the palm vertex's cluster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    /// `sup |x|^d` over the cluster.
    pub diameter_pow: f64,
    pub size: usize,
    /// The cluster comes within one interaction scale of the window boundary,
    /// so both values are lower bounds.
    pub censored: bool,
}

pub fn palm_statistics(g: &GraphSample) -> Result<ClusterStats> {
    let p = g.palm_index().ok_or(Error::MissingPalm)?;
    let d = g.dim();
    let scale = g.provenance().model.interaction_scale(d);
    let mut seen = vec![false; g.len()];
    let cluster = bfs(g, &[p], |_| true, &mut seen);
    let cloud = g.cloud();
    let diameter_pow = cluster.iter().map(|&i| norm(cloud.location(i)).powi(d as i32)).fold(0.0, f64::max);
    let censored = cluster.iter().any(|&i| g.window().distance_to_boundary(cloud.location(i)) < scale);
    Ok(ClusterStats { diameter_pow, size: cluster.len(), censored })
}
