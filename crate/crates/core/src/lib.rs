//! Continuum percolation on marked Poisson point processes.
//!
//! The crate samples random graphs whose vertices are a marked Poisson process
//! in R^d and whose edges follow a mark- and distance-dependent connection
//! function, evaluates annulus-crossing and long-edge events by Monte Carlo,
//! and computes effective decay exponents numerically and in closed form.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deff;
pub mod error;
pub mod estimate;
pub mod events;
pub mod graphgen;
pub mod io;
pub mod models;
pub mod pointproc;

pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use models::{conn_prob, distance_power, poisson_reciprocal_mean, Kernel, ModelSpec, Profile};
pub use pointproc::{region_volume, sample_poisson, MarkedPoint, PointCloud, Region, RngStream, StreamLabel};
