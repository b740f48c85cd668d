use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pointproc::Region;

/// How a finite window stands in for the infinite environment that the
/// interference counts depend on.
///
/// Points are additionally sampled in a shell of width
/// `margin_factor * mark_floor^(-xi/d)` around the window. They are never
/// graph vertices, only interferers. A vertex whose interference ball still
/// leaves the enlarged window receives an independent Poisson top-up for the
/// missing volume, unless `exact_window` is set, in which case that is an
/// error for vertices in `core`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowPolicy {
    /// Region where events are evaluated; defaults to the whole window.
    pub core: Option<Region>,
    pub margin_factor: f64,
    pub mark_floor: f64,
    pub exact_window: bool,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self { core: None, margin_factor: 1.0, mark_floor: 0.01, exact_window: false }
    }
}

impl WindowPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin_factor >= 1.0 && self.margin_factor.is_finite()) {
            return Err(invalid(format!("margin_factor = {} must be >= 1", self.margin_factor)));
        }
        if !(0.0..1.0).contains(&self.mark_floor) {
            return Err(invalid(format!("mark_floor = {} must lie in [0, 1)", self.mark_floor)));
        }
        if let Some(core) = &self.core {
            core.validate()?;
        }
        Ok(())
    }

    /// Shell width for interference exponent `xi` in dimension `d`.
    pub fn margin(&self, xi: f64, d: usize) -> Result<f64> {
        if xi == 0.0 {
            return Ok(self.margin_factor);
        }
        if self.mark_floor <= 0.0 {
            return Err(invalid("mark_floor must be positive when xi > 0"));
        }
        Ok(self.margin_factor * self.mark_floor.powf(-xi / d as f64))
    }
}
