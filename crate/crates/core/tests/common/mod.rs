//! Brute-force references used by the integration tests. Everything here
//! works on a dense adjacency matrix and shares no code with the library's
//! traversal routines.

#![allow(dead_code, clippy::needless_range_loop)]

use perc_core::events::EventSpec;
use perc_core::graphgen::{GraphSample, PairScope, Provenance, WindowPolicy};
use perc_core::pointproc::{MarkedPoint, PointCloud, Region};
use perc_core::ModelSpec;
use rand::rngs::StdRng;
use rand::Rng;

pub struct Dense {
    pub n: usize,
    pub loc: Vec<Vec<f64>>,
    pub adj: Vec<Vec<bool>>,
    pub palm: Option<usize>,
    pub window_radius: f64,
    pub scale: f64,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dpow(x: &[f64], y: &[f64], d: usize) -> f64 {
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    s.sqrt().powi(d as i32)
}

impl Dense {
    pub fn of(g: &GraphSample) -> Self {
        let n = g.len();
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                adj[i][j] = g.has_edge(i, j);
            }
        }
        let window_radius = match g.window() {
            Region::Ball { radius, .. } => *radius,
            other => panic!("oracle expects a centered ball window, got {other:?}"),
        };
        Self {
            n,
            loc: (0..n).map(|i| g.cloud().location(i).to_vec()).collect(),
            adj,
            palm: g.palm_index(),
            window_radius,
            scale: g.provenance().model.interaction_scale(g.dim()),
        }
    }

    /// Reachability among vertices satisfying `keep`, by repeated boolean
    /// squaring of `I + A` restricted to those vertices.
    pub fn closure(&self, keep: &dyn Fn(usize) -> bool) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut m: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| keep(i) && keep(j) && (i == j || self.adj[i][j])).collect())
            .collect();
        let mut len = 1;
        while len < n {
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if m[i][k] {
                        for j in 0..n {
                            next[i][j] |= m[k][j];
                        }
                    }
                }
            }
            m = next;
            len *= 2;
        }
        m
    }

    pub fn cluster(&self, start: usize, domain: &Region) -> Vec<usize> {
        let keep = |i: usize| domain.contains(&self.loc[i]);
        let c = self.closure(&keep);
        (0..self.n).filter(|&j| c[start][j]).collect()
    }

    pub fn event(&self, e: &EventSpec) -> bool {
        let d = self.loc.first().map_or(1, Vec::len);
        let r = e.radius(d);
        let c = e.center(d);
        let dist = |i: usize| dpow(&self.loc[i], &c, 1);
        let pairs = || (0..self.n).flat_map(move |i| (0..self.n).map(move |j| (i, j))).filter(|&(i, j)| self.adj[i][j]);
        match e {
            EventSpec::G { .. } => {
                let inside = |i: usize| dist(i) < 3.0 * r;
                let reach = self.closure(&inside);
                (0..self.n).any(|i| dist(i) < r && (0..self.n).any(|j| reach[i][j] && dist(j) >= 2.0 * r))
            }
            EventSpec::Gprime { .. } => pairs().any(|(i, j)| dist(i) < r && dist(j) >= 2.0 * r && dist(j) < 3.0 * r),
            EventSpec::H { .. } => pairs().any(|(i, j)| dist(i) < 2.0 * r && dist(j) >= 3.0 * r),
            EventSpec::F { alpha } => {
                pairs().any(|(i, j)| dist(i) < 20.0 * r && dist(j) < 20.0 * r && dpow(&self.loc[i], &self.loc[j], d) >= *alpha)
            }
            EventSpec::E { alpha, .. } => {
                let p = self.palm.expect("E needs a palm vertex");
                (0..self.n).any(|j| self.adj[p][j] && norm(&self.loc[j]).powi(d as i32) >= *alpha)
            }
        }
    }

    /// `(diameter_pow, size, censored)` of the palm cluster.
    pub fn palm_stats(&self) -> (f64, usize, bool) {
        let p = self.palm.expect("palm vertex");
        let d = self.loc[0].len();
        let reach = self.closure(&|_| true);
        let members: Vec<usize> = (0..self.n).filter(|&j| reach[p][j]).collect();
        let diam = members.iter().map(|&j| norm(&self.loc[j]).powi(d as i32)).fold(0.0, f64::max);
        let censored = members.iter().any(|&j| self.window_radius - norm(&self.loc[j]) < self.scale);
        (diam, members.len(), censored)
    }
}

/// Random graph on at most `max_n` vertices in a centered ball window, with
/// independent uniform edges. Vertex 0 sits at the origin and is the palm
/// vertex when `palm` is set.
pub fn random_instance(rng: &mut StdRng, max_n: usize, d: usize, spread: f64, window_radius: f64, palm: bool) -> GraphSample {
    let n = rng.random_range(1..=max_n);
    let edge_p: f64 = rng.random_range(0.05..0.6);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let loc: Vec<f64> = if i == 0 && palm {
            vec![0.0; d]
        } else {
            loop {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-spread..spread)).collect();
                if norm(&v) < spread {
                    break v;
                }
            }
        };
        pts.push(MarkedPoint::new(loc, rng.random_range(0.01..0.99)).unwrap());
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(edge_p) {
                edges.push((i, j));
            }
        }
    }
    let beta = rng.random_range(0.5..2.0);
    let model = ModelSpec::wdrcm(perc_core::Profile::LongRange { p: 1.0, delta: 3.0 }, perc_core::Kernel { gamma: 0.2, gamma_prime: 0.1 }, beta).unwrap();
    let window = Region::centered_ball(d, window_radius).unwrap();
    let prov = Provenance {
        model,
        window,
        lambda: 1.0,
        master_seed: 0,
        replication: 0,
        scope: PairScope::All,
        policy: WindowPolicy::default(),
    };
    let cloud = PointCloud::from_points(d, &pts, None).unwrap();
    GraphSample::from_edges(cloud, &edges, palm.then_some(0), prov).unwrap()
}
