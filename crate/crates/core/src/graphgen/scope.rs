//! Restrictions of the pair set that a sampler realizes.
//!
//! Every pair owns its uniform variate regardless of which pairs are visited,
//! so a scoped sample is the exact restriction of the full graph to the
//! admitted pairs.

use serde::{Deserialize, Serialize};

use crate::models::distance_power;
use crate::pointproc::{dist2, Region};

/// One side of a [`PairScope::Between`] restriction. Tagged by `zone`, as
/// the wrapped [`Region`] already uses `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "zone", rename_all = "snake_case")]
pub enum Zone {
    Region(Region),
    /// `{ x : |x - center| >= radius }`
    Exterior { center: Vec<f64>, radius: f64 },
}

impl Zone {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Zone::Region(r) => r.contains(x),
            Zone::Exterior { center, radius } => dist2(x, center) >= radius * radius,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairScope {
    #[default]
    All,
    /// Both endpoints in one of the regions.
    WithinAny { regions: Vec<Region> },
    /// One endpoint in each zone.
    Between { first: Zone, second: Zone },
    /// Pairs with `|x - y|^d >= min_len_pow`.
    LongEdges { min_len_pow: f64 },
    /// Pairs containing the palm vertex.
    PalmIncident,
}

impl PairScope {
    pub fn admits(&self, i: usize, j: usize, xi: &[f64], xj: &[f64], palm: Option<usize>) -> bool {
        match self {
            PairScope::All => true,
            PairScope::WithinAny { regions } => regions.iter().any(|r| r.contains(xi) && r.contains(xj)),
            PairScope::Between { first, second } => {
                (first.contains(xi) && second.contains(xj)) || (first.contains(xj) && second.contains(xi))
            }
            PairScope::LongEdges { min_len_pow } => distance_power(xi, xj) >= *min_len_pow,
            PairScope::PalmIncident => palm.is_some_and(|p| p == i || p == j),
        }
    }

    /// Whether a sample realized under `self` contains every pair of `need`.
    pub fn covers(&self, need: &PairScope) -> bool {
        match (self, need) {
            (PairScope::All, _) => true,
            (PairScope::WithinAny { regions: have }, PairScope::WithinAny { regions: want }) => {
                want.iter().all(|r| have.contains(r))
            }
            _ => self == need,
        }
    }

    /// Smallest distance power of an admitted pair.
    pub(crate) fn min_len_pow(&self) -> f64 {
        match self {
            PairScope::LongEdges { min_len_pow } => *min_len_pow,
            _ => 0.0,
        }
    }
}
