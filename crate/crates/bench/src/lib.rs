//! Shared fixtures for the benchmarks.

use perc_core::{ModelSpec, Region};

/// Models with light, moderate and heavy long-range tails.
pub fn models() -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("mark_free", ModelSpec::long_range(0.0, 0.0, 3.5).unwrap()),
        ("hubs", ModelSpec::long_range(0.8, 0.0, 4.0).unwrap()),
        ("interference", ModelSpec::interference(0.65, 2.7, 0.3, 1.0, 2).unwrap()),
    ]
}

/// Planar ball window holding about `points` points at unit intensity.
pub fn window_for(points: f64) -> Region {
    Region::centered_ball(2, (points / std::f64::consts::PI).sqrt()).unwrap()
}
