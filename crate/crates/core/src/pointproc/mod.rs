//! Regions of R^d, marked Poisson sampling, spatial indexing and
//! reproducible random streams.

mod cloud;
mod region;
mod rng;

pub use cloud::{grid_side, sample_poisson, sample_poisson_with, MarkedPoint, PointCloud, SamplingLimits};
pub(crate) use cloud::{poisson_count, uniform_locations};
pub use region::{cap_volume, lens_volume, unit_ball_volume, Region};
pub(crate) use region::{dist2, norm};
pub use rng::{philox4x32, Purpose, RngStream, StreamLabel, StreamRng};
pub(crate) use rng::mix64;

/// Lebesgue volume of a region.
pub fn region_volume(region: &Region) -> f64 {
    region.volume()
}
