//! Pair-keyed edge randomness.
//!
//! Vertices are grouped into index tiles of [`TILE`] consecutive vertices.
//! Every tile pair owns a stream that yields the order statistics of its
//! `TILE * TILE` slot uniforms in increasing order (Rényi representation)
//! together with the slot each one belongs to (a keyed Feistel permutation).
//! Stopping the sequence once it exceeds an upper bound on the connection
//! probabilities of the tile pair therefore visits exactly the pairs that can
//! connect, and the uniform attached to each pair does not depend on whether
//! the sequence was stopped early.

use rayon::prelude::*;

use crate::models::{distance_power, power_from_squared, ModelSpec};
use crate::pointproc::{mix64, PointCloud, Purpose, RngStream, StreamRng};

use super::scope::PairScope;

pub const TILE: usize = 16;
const SLOTS: usize = TILE * TILE;
const HALF_BITS: u32 = 4;
const HALF_MASK: u32 = (1 << HALF_BITS) - 1;

/// Whether the sampler may skip pairs using per-tile probability bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PairMode {
    #[default]
    Pruned,
    /// Visit every pair; the reference the pruned path must match bit for bit.
    Reference,
}

struct SlotPermutation {
    keys: [u64; 4],
}

impl SlotPermutation {
    fn new(seed: u64) -> Self {
        let mut keys = [0u64; 4];
        let mut h = seed;
        for k in keys.iter_mut() {
            h = mix64(h.wrapping_add(0x9E37_79B9_7F4A_7C15));
            *k = h;
        }
        Self { keys }
    }

    #[inline]
    fn apply(&self, x: u32) -> u32 {
        let mut left = x >> HALF_BITS;
        let mut right = x & HALF_MASK;
        for key in self.keys {
            let f = (mix64(key ^ u64::from(right)) as u32) & HALF_MASK;
            let next = left ^ f;
            left = right;
            right = next;
        }
        (left << HALF_BITS) | right
    }
}

/// Increasing slot uniforms of one tile pair.
///
/// The smallest uniform and the slot permutation come from a hash of the pair
/// key, so pairs that stop after one draw never touch the block generator.
struct OrderStats<'a> {
    key: u64,
    parent: &'a RngStream,
    tiles: [u64; 2],
    rng: Option<StreamRng>,
    perm: Option<SlotPermutation>,
    drawn: usize,
    spacing_sum: f64,
}

fn open_unit_from(h: u64) -> f64 {
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

impl<'a> OrderStats<'a> {
    fn new(parent: &'a RngStream, base: u64, a: usize, b: usize) -> Self {
        let key = pair_key(base, a, b);
        Self { key, parent, tiles: [a as u64, b as u64], rng: None, perm: None, drawn: 0, spacing_sum: 0.0 }
    }

    /// Next order statistic.
    #[inline]
    fn next(&mut self) -> Option<f64> {
        if self.drawn == SLOTS {
            return None;
        }
        let v = if self.drawn == 0 {
            open_unit_from(self.key)
        } else {
            self.rng.get_or_insert_with(|| self.parent.derive(Purpose::Edges, self.tiles).rng()).uniform_open()
        };
        self.spacing_sum += -v.ln() / (SLOTS - self.drawn) as f64;
        self.drawn += 1;
        Some(-(-self.spacing_sum).exp_m1())
    }

    /// Slot owning the most recent order statistic.
    #[inline]
    fn slot(&mut self) -> usize {
        let key = self.key;
        let perm = self.perm.get_or_insert_with(|| SlotPermutation::new(mix64(key ^ 0x5107_5107_5107_5107)));
        perm.apply(self.drawn as u32 - 1) as usize
    }
}

/// Per-sample part of the pair keys.
fn key_base(stream: &RngStream) -> u64 {
    mix64(stream.path_hash() ^ mix64(stream.master_seed.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Key of tile pair `(a, b)`.
fn pair_key(base: u64, a: usize, b: usize) -> u64 {
    mix64(base ^ mix64(((a as u64) << 32 | b as u64).wrapping_add(0xD1B5_4A32_D192_ED03)))
}

struct TileInfo {
    lo: Vec<f64>,
    hi: Vec<f64>,
    min_mark: f64,
    min_count: usize,
    /// Bit set of scope components present in the tile (see `scope_bits`).
    bits: u64,
}

fn scope_bits(scope: &PairScope, x: &[f64]) -> u64 {
    match scope {
        PairScope::WithinAny { regions } => regions
            .iter()
            .take(64)
            .enumerate()
            .fold(0, |acc, (k, r)| if r.contains(x) { acc | (1 << k) } else { acc }),
        PairScope::Between { first, second } => u64::from(first.contains(x)) | (u64::from(second.contains(x)) << 1),
        _ => 0,
    }
}

fn tile_pair_possible(scope: &PairScope, a: &TileInfo, b: &TileInfo) -> bool {
    match scope {
        PairScope::WithinAny { regions } if regions.len() <= 64 => a.bits & b.bits != 0,
        PairScope::Between { .. } => (a.bits & 1 != 0 && b.bits & 2 != 0) || (a.bits & 2 != 0 && b.bits & 1 != 0),
        PairScope::LongEdges { min_len_pow } => box_max_dist_pow(a, b) >= *min_len_pow,
        _ => true,
    }
}

fn box_min_dist_pow(a: &TileInfo, b: &TileInfo) -> f64 {
    let d = a.lo.len();
    let s2: f64 = (0..d).map(|k| (b.lo[k] - a.hi[k]).max(a.lo[k] - b.hi[k]).max(0.0).powi(2)).sum();
    power_from_squared(s2, d)
}

fn box_max_dist_pow(a: &TileInfo, b: &TileInfo) -> f64 {
    let d = a.lo.len();
    let s2: f64 = (0..d).map(|k| (b.hi[k] - a.lo[k]).max(a.hi[k] - b.lo[k]).powi(2)).sum();
    power_from_squared(s2, d)
}

fn tiles(cloud: &PointCloud, counts: &[usize], scope: &PairScope) -> Vec<TileInfo> {
    let n = cloud.len();
    let d = cloud.dim();
    (0..n.div_ceil(TILE))
        .map(|t| {
            let mut info = TileInfo {
                lo: vec![f64::INFINITY; d],
                hi: vec![f64::NEG_INFINITY; d],
                min_mark: 1.0,
                min_count: usize::MAX,
                bits: 0,
            };
            for i in t * TILE..((t + 1) * TILE).min(n) {
                let x = cloud.location(i);
                for ((lo, hi), &v) in info.lo.iter_mut().zip(info.hi.iter_mut()).zip(x) {
                    *lo = lo.min(v);
                    *hi = hi.max(v);
                }
                info.min_mark = info.min_mark.min(cloud.mark(i));
                info.min_count = info.min_count.min(counts.get(i).copied().unwrap_or(0));
                info.bits |= scope_bits(scope, x);
            }
            info
        })
        .collect()
}

/// Realizes the edges of `cloud` admitted by `scope`.
///
/// `counts` holds the interference count of every vertex (it may be empty
/// for models without interference). Returns sorted pairs `(i, j)`, `i < j`.
pub fn sample_edges(
    model: &ModelSpec,
    cloud: &PointCloud,
    counts: &[usize],
    palm: Option<usize>,
    scope: &PairScope,
    rng: &RngStream,
    mode: PairMode,
) -> Vec<(u32, u32)> {
    let n = cloud.len();
    if n < 2 || (matches!(scope, PairScope::PalmIncident) && palm.is_none()) {
        return Vec::new();
    }
    let count = |i: usize| counts.get(i).copied().unwrap_or(0);
    let info = tiles(cloud, counts, scope);
    let num_tiles = info.len();
    let palm_tile = palm.map(|p| p / TILE);
    let edge_stream = rng.derive(Purpose::Edges, [0, 0]);
    let base = key_base(&edge_stream);

    let process = |a: usize, b: usize| -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        let q = match mode {
            PairMode::Reference => 1.0,
            PairMode::Pruned => {
                if !tile_pair_possible(scope, &info[a], &info[b]) {
                    return out;
                }
                let r_min = box_min_dist_pow(&info[a], &info[b]).max(scope.min_len_pow());
                let mut q = model.pair_upper_bound(info[a].min_mark, info[b].min_mark, r_min);
                if !model.is_environment_free() {
                    q /= 1.0 + info[a].min_count.min(info[b].min_count) as f64;
                }
                q * (1.0 + 1e-12)
            }
        };
        let mut stats = OrderStats::new(&edge_stream, base, a, b);
        while let Some(u) = stats.next() {
            if u >= q {
                break;
            }
            let slot = stats.slot();
            let (li, lj) = (slot / TILE, slot % TILE);
            if a == b && li >= lj {
                continue;
            }
            let (i, j) = (a * TILE + li, b * TILE + lj);
            if i >= n || j >= n {
                continue;
            }
            let (xi, xj) = (cloud.location(i), cloud.location(j));
            if !scope.admits(i, j, xi, xj, palm) {
                continue;
            }
            let p = model.quenched(distance_power(xi, xj), cloud.mark(i), cloud.mark(j), count(i), count(j));
            if u < p {
                out.push((i as u32, j as u32));
            }
        }
        out
    };

    let mut edges: Vec<(u32, u32)> = match (mode, palm_tile, scope) {
        (PairMode::Pruned, Some(pt), PairScope::PalmIncident) => (0..num_tiles)
            .into_par_iter()
            .flat_map_iter(|t| process(t.min(pt), t.max(pt)))
            .collect(),
        _ => (0..num_tiles)
            .into_par_iter()
            .flat_map_iter(|a| (a..num_tiles).flat_map(move |b| process(a, b)))
            .collect(),
    };
    edges.par_sort_unstable();
    edges
}
