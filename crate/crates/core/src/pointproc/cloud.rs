//! Marked point clouds with a uniform cell-grid index, and Poisson sampling.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::region::{dist2, Region};
use super::rng::{Purpose, RngStream, StreamRng};
use crate::error::{invalid, Error, Result};

/// A vertex: location in R^d plus a mark in (0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub location: Vec<f64>,
    pub mark: f64,
}

impl MarkedPoint {
    pub fn new(location: Vec<f64>, mark: f64) -> Result<Self> {
        if !(mark > 0.0 && mark < 1.0) {
            return Err(invalid(format!("mark {mark} outside (0, 1)")));
        }
        if location.is_empty() || location.iter().any(|x| !x.is_finite()) {
            return Err(invalid("location must be a finite point of positive dimension"));
        }
        Ok(Self { location, mark })
    }
}

/// Uniform grid over the bounding box of a point set, stored as CSR.
#[derive(Clone, Debug)]
struct CellGrid {
    origin: Vec<f64>,
    side: f64,
    shape: Vec<usize>,
    starts: Vec<u32>,
    members: Vec<u32>,
}

impl CellGrid {
    fn build(dim: usize, coords: &[f64], side: f64) -> Self {
        let n = coords.len() / dim.max(1);
        if n == 0 {
            return Self { origin: vec![0.0; dim], side, shape: vec![1; dim], starts: vec![0, 0], members: vec![] };
        }
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        // Keep the cell count O(n) even for a poorly chosen side.
        let mut side = side;
        let budget = (4 * n + 1024) as f64;
        loop {
            let cells: f64 = (0..dim).map(|k| ((hi[k] - lo[k]) / side).floor() + 1.0).product();
            if cells <= budget {
                break;
            }
            side *= 2.0;
        }
        let shape: Vec<usize> = (0..dim).map(|k| ((hi[k] - lo[k]) / side).floor() as usize + 1).collect();
        let total: usize = shape.iter().product();
        let mut grid = Self { origin: lo, side, shape, starts: vec![0; total + 1], members: vec![0; n] };
        let cell_of: Vec<usize> = coords.chunks_exact(dim).map(|p| grid.linear(p)).collect();
        for &c in &cell_of {
            grid.starts[c + 1] += 1;
        }
        for c in 0..total {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cell_of.iter().enumerate() {
            grid.members[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    fn axis_cell(&self, k: usize, x: f64) -> i64 {
        ((x - self.origin[k]) / self.side).floor() as i64
    }

    fn linear(&self, p: &[f64]) -> usize {
        let mut idx = 0usize;
        for k in (0..p.len()).rev() {
            let c = self.axis_cell(k, p[k]).clamp(0, self.shape[k] as i64 - 1) as usize;
            idx = idx * self.shape[k] + c;
        }
        idx
    }

    /// Calls `f` with every member of every cell meeting the cube `c ± r`.
    fn for_each_candidate(&self, c: &[f64], r: f64, mut f: impl FnMut(usize)) {
        let dim = c.len();
        let mut lo = vec![0usize; dim];
        let mut hi = vec![0usize; dim];
        for k in 0..dim {
            let a = self.axis_cell(k, c[k] - r);
            let b = self.axis_cell(k, c[k] + r);
            if b < 0 || a >= self.shape[k] as i64 {
                return;
            }
            lo[k] = a.max(0) as usize;
            hi[k] = b.min(self.shape[k] as i64 - 1) as usize;
        }
        let mut cur = lo.clone();
        loop {
            let mut idx = 0usize;
            for k in (0..dim).rev() {
                idx = idx * self.shape[k] + cur[k];
            }
            for &m in &self.members[self.starts[idx] as usize..self.starts[idx + 1] as usize] {
                f(m as usize);
            }
            let mut k = 0;
            loop {
                if k == dim {
                    return;
                }
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }
}

/// An immutable finite set of marked points in R^d with a spatial index.
#[derive(Clone, Debug)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    marks: Vec<f64>,
    grid: CellGrid,
}

impl PointCloud {
    /// Builds a cloud from flat coordinates (`dim` per point) and marks.
    pub fn from_parts(dim: usize, coords: Vec<f64>, marks: Vec<f64>, cell_side: Option<f64>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * marks.len() {
            return Err(invalid("coordinate buffer does not match dimension and mark count"));
        }
        if marks.iter().any(|m| !(*m > 0.0 && *m < 1.0)) {
            return Err(invalid("marks must lie in (0, 1)"));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        let side = match cell_side {
            Some(s) if s > 0.0 && s.is_finite() => s,
            Some(s) => return Err(invalid(format!("cell side {s} must be positive"))),
            None => default_cell_side(dim, &coords, marks.len()),
        };
        let grid = CellGrid::build(dim, &coords, side);
        Ok(Self { dim, coords, marks, grid })
    }

    pub fn from_points(dim: usize, points: &[MarkedPoint], cell_side: Option<f64>) -> Result<Self> {
        if points.iter().any(|p| p.location.len() != dim) {
            return Err(invalid("point dimension mismatch"));
        }
        let coords = points.iter().flat_map(|p| p.location.iter().copied()).collect();
        let marks = points.iter().map(|p| p.mark).collect();
        Self::from_parts(dim, coords, marks, cell_side)
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, coords: vec![], marks: vec![], grid: CellGrid::build(dim, &[], 1.0) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn location(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mark(&self, i: usize) -> f64 {
        self.marks[i]
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> MarkedPoint {
        MarkedPoint { location: self.location(i).to_vec(), mark: self.marks[i] }
    }

    pub fn points(&self) -> impl Iterator<Item = MarkedPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn cell_side(&self) -> f64 {
        self.grid.side
    }

    /// Indices of points with `|x - center| < radius` (or `<=` when `closed`),
    /// in ascending order.
    pub fn range_indices(&self, center: &[f64], radius: f64, closed: bool) -> Vec<usize> {
        let mut out = Vec::new();
        if radius < 0.0 || (radius == 0.0 && !closed) || self.is_empty() {
            return out;
        }
        let r2 = radius * radius;
        self.grid.for_each_candidate(center, radius, |i| {
            let q = dist2(self.location(i), center);
            if q < r2 || (closed && q == r2) {
                out.push(i);
            }
        });
        out.sort_unstable();
        out
    }

    /// Points strictly inside the open ball `B(radius, center)`.
    pub fn range_query(&self, center: &[f64], radius: f64) -> Vec<MarkedPoint> {
        self.range_indices(center, radius, false).into_iter().map(|i| self.point(i)).collect()
    }

    /// Number of points in the closed ball, skipping index `skip`.
    pub fn count_closed(&self, center: &[f64], radius: f64, skip: Option<usize>) -> usize {
        if radius < 0.0 || self.is_empty() {
            return 0;
        }
        let r2 = radius * radius;
        let mut n = 0;
        self.grid.for_each_candidate(center, radius, |i| {
            if Some(i) != skip && dist2(self.location(i), center) <= r2 {
                n += 1;
            }
        });
        n
    }

    /// New cloud with the points reordered by `perm` (new index `k` holds old `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut marks = Vec::with_capacity(self.marks.len());
        for &i in perm {
            coords.extend_from_slice(self.location(i));
            marks.push(self.marks[i]);
        }
        let grid = CellGrid::build(self.dim, &coords, self.grid.side);
        Self { dim: self.dim, coords, marks, grid }
    }

    /// Concatenation with another cloud of the same dimension.
    pub fn concat(&self, other: &PointCloud) -> Self {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut marks = self.marks.clone();
        marks.extend_from_slice(&other.marks);
        let grid = CellGrid::build(self.dim, &coords, self.grid.side.min(other.grid.side));
        Self { dim: self.dim, coords, marks, grid }
    }
}

fn default_cell_side(dim: usize, coords: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in coords.chunks_exact(dim) {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diam = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    grid_side(dim, diam, n as f64)
}

/// `max(1, diameter / ceil(N^{1/d}))`.
pub fn grid_side(dim: usize, diameter: f64, expected: f64) -> f64 {
    let per_axis = expected.max(1.0).powf(1.0 / dim as f64).ceil();
    (diameter / per_axis).max(1.0)
}

/// Resource guard for sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingLimits {
    pub max_expected_points: f64,
}

impl Default for SamplingLimits {
    fn default() -> Self {
        Self { max_expected_points: 2.0e7 }
    }
}

impl SamplingLimits {
    pub fn check(&self, expected: f64) -> Result<()> {
        if expected > self.max_expected_points {
            return Err(Error::InstanceTooLarge { expected, cap: self.max_expected_points });
        }
        Ok(())
    }
}

/// Draws `count` uniform locations in `region` (rejection from its bounding box)
/// and, when `accept` holds, appends them to `coords`.
pub(crate) fn uniform_locations(
    region: &Region,
    count: usize,
    rng: &mut StreamRng,
    accept: impl Fn(&[f64]) -> bool,
    coords: &mut Vec<f64>,
) {
    let (lo, hi) = region.bounding_box();
    let d = lo.len();
    let mut p = vec![0.0; d];
    for _ in 0..count {
        loop {
            for k in 0..d {
                p[k] = rng.uniform_in(lo[k], hi[k]);
            }
            if region.contains(&p) && accept(&p) {
                break;
            }
        }
        coords.extend_from_slice(&p);
    }
}

pub(crate) fn poisson_count(mean: f64, rng: &mut StreamRng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    let n: f64 = dist.sample(rng);
    n as usize
}

/// Homogeneous Poisson process of intensity `lambda` on `region` with i.i.d.
/// uniform marks.
pub fn sample_poisson(region: &Region, lambda: f64, rng: &RngStream) -> Result<PointCloud> {
    sample_poisson_with(region, lambda, rng, &SamplingLimits::default(), None)
}

pub fn sample_poisson_with(
    region: &Region,
    lambda: f64,
    rng: &RngStream,
    limits: &SamplingLimits,
    cell_side: Option<f64>,
) -> Result<PointCloud> {
    region.validate()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("intensity {lambda} must be finite and >= 0")));
    }
    let d = region.dim();
    let expected = lambda * region.volume();
    limits.check(expected)?;
    let mut g = rng.derive(Purpose::Points, [0, 0]).rng();
    let n = poisson_count(expected, &mut g);
    let mut coords = Vec::with_capacity(n * d);
    uniform_locations(region, n, &mut g, |_| true, &mut coords);
    let marks: Vec<f64> = (0..n).map(|_| g.uniform_open()).collect();
    let side = cell_side.unwrap_or_else(|| grid_side(d, region.diameter(), expected));
    PointCloud::from_parts(d, coords, marks, Some(side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::rng::RngStream;

    fn brute(cloud: &PointCloud, c: &[f64], r: f64) -> Vec<usize> {
        (0..cloud.len()).filter(|&i| dist2(cloud.location(i), c) < r * r).collect()
    }

    #[test]
    fn zero_intensity_is_empty() {
        let reg = Region::centered_ball(2, 5.0).unwrap();
        assert!(sample_poisson(&reg, 0.0, &RngStream::root(1)).unwrap().is_empty());
    }

    #[test]
    fn deterministic_samples() {
        let reg = Region::centered_ball(3, 4.0).unwrap();
        let s = RngStream::root(99).replication(5);
        let a = sample_poisson(&reg, 2.0, &s).unwrap();
        let b = sample_poisson(&reg, 2.0, &s).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert_eq!(a.marks(), b.marks());
        assert!(!a.is_empty());
        for i in 0..a.len() {
            assert!(reg.contains(a.location(i)));
        }
    }

    #[test]
    fn resource_guard() {
        let reg = Region::centered_ball(2, 1000.0).unwrap();
        let lim = SamplingLimits { max_expected_points: 1e3 };
        let err = sample_poisson_with(&reg, 1.0, &RngStream::root(1), &lim, None).unwrap_err();
        assert!(matches!(err, Error::InstanceTooLarge { .. }));
    }

    #[test]
    fn range_query_matches_scan() {
        let reg = Region::new_box(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let cloud = sample_poisson(&reg, 10.0, &RngStream::root(3)).unwrap();
        let mut q = RngStream::root(4).rng();
        for _ in 0..100 {
            let c = [q.uniform_in(-1.0, 11.0), q.uniform_in(-1.0, 11.0)];
            let r = q.uniform_in(0.0, 3.0);
            assert_eq!(cloud.range_indices(&c, r, false), brute(&cloud, &c, r));
        }
    }

    #[test]
    fn range_query_edge_cases() {
        let pts = vec![
            MarkedPoint::new(vec![1.0, 0.0], 0.5).unwrap(),
            MarkedPoint::new(vec![0.0, 0.5], 0.5).unwrap(),
        ];
        let cloud = PointCloud::from_points(2, &pts, None).unwrap();
        assert!(cloud.range_query(&[0.0, 0.0], 0.0).is_empty());
        let hits = cloud.range_query(&[0.0, 0.0], 1.0);
        assert_eq!(hits, vec![pts[1].clone()]);
        assert_eq!(cloud.count_closed(&[0.0, 0.0], 1.0, None), 2);
        assert_eq!(cloud.count_closed(&[0.0, 0.0], 1.0, Some(0)), 1);
    }

    #[test]
    fn rejects_bad_marks() {
        assert!(MarkedPoint::new(vec![0.0], 1.0).is_err());
        assert!(MarkedPoint::new(vec![0.0], 0.0).is_err());
        assert!(PointCloud::from_parts(2, vec![0.0, 0.0], vec![1.5], None).is_err());
    }
}
