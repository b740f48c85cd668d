//! Graph realizations: Poisson vertices in a window, pair-keyed Bernoulli
//! edges, interference bookkeeping and Palm insertion.

mod pairs;
mod scope;
mod window;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::ModelSpec;
use crate::pointproc::{
    grid_side, poisson_count, sample_poisson_with, uniform_locations, unit_ball_volume, MarkedPoint, PointCloud, Purpose,
    Region, RngStream, SamplingLimits,
};

pub use pairs::{sample_edges, PairMode, TILE};
pub use scope::{PairScope, Zone};
pub use window::WindowPolicy;

/// What a sample was drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: ModelSpec,
    pub window: Region,
    pub lambda: f64,
    pub master_seed: u64,
    pub replication: u64,
    pub scope: PairScope,
    pub policy: WindowPolicy,
}

/// A realized graph with symmetric adjacency stored as CSR.
#[derive(Clone, Debug)]
pub struct GraphSample {
    cloud: PointCloud,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    palm_index: Option<usize>,
    interferers: Vec<usize>,
    provenance: Provenance,
}

impl GraphSample {
    /// Builds a sample from an explicit edge list. Duplicate edges are merged;
    /// self-loops and out-of-range indices are rejected.
    pub fn from_edges(
        cloud: PointCloud,
        edges: &[(usize, usize)],
        palm_index: Option<usize>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = cloud.len();
        if let Some(p) = palm_index {
            if p >= n || cloud.location(p).iter().any(|&v| v != 0.0) {
                return Err(invalid("palm vertex must be an existing vertex at the origin"));
            }
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!("edge ({i}, {j}) references a missing vertex")));
            }
            if i == j {
                return Err(invalid(format!("self-loop at vertex {i}")));
            }
            pairs.push((i.min(j) as u32, i.max(j) as u32));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::from_sorted(cloud, &pairs, palm_index, Vec::new(), provenance))
    }

    fn from_sorted(
        cloud: PointCloud,
        pairs: &[(u32, u32)],
        palm_index: Option<usize>,
        interferers: Vec<usize>,
        provenance: Provenance,
    ) -> Self {
        let n = cloud.len();
        let mut degree = vec![0usize; n + 1];
        for &(i, j) in pairs {
            degree[i as usize + 1] += 1;
            degree[j as usize + 1] += 1;
        }
        for k in 0..n {
            degree[k + 1] += degree[k];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; 2 * pairs.len()];
        for &(i, j) in pairs {
            neighbors[fill[i as usize]] = j;
            fill[i as usize] += 1;
            neighbors[fill[j as usize]] = i;
            fill[j as usize] += 1;
        }
        for k in 0..n {
            neighbors[offsets[k]..offsets[k + 1]].sort_unstable();
        }
        Self { cloud, offsets, neighbors, palm_index, interferers, provenance }
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn palm_index(&self) -> Option<usize> {
        self.palm_index
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn scope(&self) -> &PairScope {
        &self.provenance.scope
    }

    pub fn window(&self) -> &Region {
        &self.provenance.window
    }

    /// Interference counts per vertex (empty for environment-free models).
    pub fn interferers(&self) -> &[usize] {
        &self.interferers
    }

    /// Sorted neighbor indices of vertex `i`.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| {
            self.neighbors(i).iter().map(|&j| j as usize).filter(move |&j| j > i).map(move |j| (i, j))
        })
    }

    /// Copy of the graph with one more edge.
    pub fn with_extra_edge(&self, i: usize, j: usize) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = self.edges().collect();
        edges.push((i, j));
        let mut g = Self::from_edges(self.cloud.clone(), &edges, self.palm_index, self.provenance.clone())?;
        g.interferers = self.interferers.clone();
        Ok(g)
    }
}

/// Knobs of [`sample_graph_with`].
#[derive(Clone, Debug, Default)]
pub struct SampleOptions {
    pub policy: WindowPolicy,
    pub scope: PairScope,
    pub mode: PairMode,
    pub limits: SamplingLimits,
}

pub fn sample_graph(model: &ModelSpec, window: &Region, lambda: f64, rng: &RngStream, policy: &WindowPolicy) -> Result<GraphSample> {
    let opts = SampleOptions { policy: policy.clone(), ..Default::default() };
    sample_graph_with(model, window, lambda, rng, &opts, false)
}

/// As [`sample_graph`] plus a vertex at the origin with an independent mark.
pub fn sample_palm(model: &ModelSpec, window: &Region, lambda: f64, rng: &RngStream, policy: &WindowPolicy) -> Result<GraphSample> {
    let opts = SampleOptions { policy: policy.clone(), ..Default::default() };
    sample_graph_with(model, window, lambda, rng, &opts, true)
}

pub fn sample_graph_with(
    model: &ModelSpec,
    window: &Region,
    lambda: f64,
    rng: &RngStream,
    opts: &SampleOptions,
    palm: bool,
) -> Result<GraphSample> {
    model.validate()?;
    window.validate()?;
    opts.policy.validate()?;
    let d = window.dim();
    if let ModelSpec::Interference { dimension, .. } = model {
        if *dimension != d {
            return Err(invalid(format!("model dimension {dimension} differs from window dimension {d}")));
        }
    }
    let origin = vec![0.0; d];
    if palm && !window.contains(&origin) {
        return Err(invalid("the window must contain the origin for a Palm sample"));
    }
    let expected = lambda * window.volume();
    let base = sample_poisson_with(window, lambda, rng, &opts.limits, Some(1.0))?;

    let mut coords = base.coords().to_vec();
    let mut marks = base.marks().to_vec();
    if palm {
        coords.extend_from_slice(&origin);
        marks.push(rng.derive(Purpose::PalmMark, [0, 0]).rng().uniform_open());
    }
    let n = marks.len();
    let order = morton_order(window, &coords, d);
    let palm_index = palm.then(|| order.iter().position(|&k| k == n - 1).expect("palm vertex present"));
    let mut sorted_coords = Vec::with_capacity(coords.len());
    let mut sorted_marks = Vec::with_capacity(n);
    for &k in &order {
        sorted_coords.extend_from_slice(&coords[k * d..(k + 1) * d]);
        sorted_marks.push(marks[k]);
    }
    let side = grid_side(d, window.diameter(), expected.max(n as f64));
    let cloud = PointCloud::from_parts(d, sorted_coords, sorted_marks, Some(side))?;

    let interferers = if model.is_environment_free() {
        Vec::new()
    } else {
        vertex_interferers(model, &cloud, window, lambda, rng, opts)?
    };
    let edges = sample_edges(model, &cloud, &interferers, palm_index, &opts.scope, rng, opts.mode);
    let provenance = Provenance {
        model: *model,
        window: window.clone(),
        lambda,
        master_seed: rng.master_seed,
        replication: rng.label.replication,
        scope: opts.scope.clone(),
        policy: opts.policy.clone(),
    };
    Ok(GraphSample::from_sorted(cloud, &edges, palm_index, interferers, provenance))
}

/// Vertex permutation along a Z-order curve over the window's bounding box,
/// so that index tiles are spatially compact.
fn morton_order(window: &Region, coords: &[f64], d: usize) -> Vec<usize> {
    let n = coords.len() / d.max(1);
    let (lo, hi) = window.bounding_box();
    let bits = (63 / d as u32).min(20);
    let scale = (1u64 << bits) as f64;
    let mut keyed: Vec<(u64, usize)> = (0..n)
        .map(|i| {
            let mut key = 0u64;
            let q: Vec<u64> = (0..d)
                .map(|k| {
                    let f = (coords[i * d + k] - lo[k]) / (hi[k] - lo[k]);
                    ((f * scale).floor().max(0.0) as u64).min((1u64 << bits) - 1)
                })
                .collect();
            for b in (0..bits).rev() {
                for qk in &q {
                    key = (key << 1) | ((qk >> b) & 1);
                }
            }
            (key, i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Poisson mass of `B(center, radius)` outside `sampled`, drawn independently.
fn top_up(center: &[f64], radius: f64, lambda: f64, sampled: &Region, rng: &RngStream) -> usize {
    let d = center.len();
    let full = unit_ball_volume(d) * radius.powi(d as i32);
    let missing = (full - sampled.ball_intersection_volume(center, radius)).max(0.0);
    poisson_count(lambda * missing, &mut rng.rng())
}

fn vertex_interferers(
    model: &ModelSpec,
    cloud: &PointCloud,
    window: &Region,
    lambda: f64,
    rng: &RngStream,
    opts: &SampleOptions,
) -> Result<Vec<usize>> {
    let d = window.dim();
    let policy = &opts.policy;
    let enlarged = window.enlarged(policy.margin(model.xi(), d)?);
    let shell_volume = (enlarged.volume() - window.volume()).max(0.0);
    opts.limits.check(lambda * (window.volume() + shell_volume))?;
    let mut g = rng.derive(Purpose::EnvPoints, [0, 0]).rng();
    let count = poisson_count(lambda * shell_volume, &mut g);
    let mut coords = Vec::with_capacity(count * d);
    uniform_locations(&enlarged, count, &mut g, |p| !window.contains(p), &mut coords);
    let marks: Vec<f64> = (0..count).map(|_| g.uniform_open()).collect();
    let shell = PointCloud::from_parts(d, coords, marks, Some(1.0))?;
    let env = cloud.concat(&shell);
    let core = policy.core.as_ref().unwrap_or(window);

    (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let x = cloud.location(i);
            let radius = model.interference_radius_pow(cloud.mark(i)).powf(1.0 / d as f64);
            let mut n = env.count_closed(x, radius, Some(i));
            if !enlarged.contains_ball(x, radius) {
                if policy.exact_window && core.contains(x) {
                    return Err(Error::WindowTooSmall(format!(
                        "interference ball of vertex {i} (radius {radius}) leaves the sampled region"
                    )));
                }
                if !policy.exact_window {
                    n += top_up(x, radius, lambda, &enlarged, &rng.derive(Purpose::TopUp, [i as u64, 0]));
                }
            }
            Ok(n)
        })
        .collect()
}

/// `N^ξ(v)` over `cloud`: points other than `v` itself within the closed
/// interference ball of `v`, plus a Poisson top-up for the part of the ball
/// outside `sampled` (an error instead under `exact_window`).
pub fn count_interferers(
    cloud: &PointCloud,
    v: &MarkedPoint,
    xi: f64,
    lambda: f64,
    sampled: &Region,
    policy: &WindowPolicy,
    rng: &RngStream,
) -> Result<usize> {
    if !(xi >= 0.0) {
        return Err(invalid(format!("xi = {xi} must be >= 0")));
    }
    let d = v.location.len();
    let radius = v.mark.powf(-xi / d as f64);
    let mut n = cloud
        .range_indices(&v.location, radius, true)
        .into_iter()
        .filter(|&i| !(cloud.mark(i) == v.mark && cloud.location(i) == v.location.as_slice()))
        .count();
    if !sampled.contains_ball(&v.location, radius) {
        if policy.exact_window {
            return Err(Error::WindowTooSmall(format!("interference ball of radius {radius} leaves the sampled region")));
        }
        n += top_up(&v.location, radius, lambda, sampled, &rng.derive(Purpose::TopUp, [0, 0]));
    }
    Ok(n)
}
