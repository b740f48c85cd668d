//! Grids of closed-form verdicts over two model parameters.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::models::{ModelSpec, Profile};

use super::classify::{analytic_classify, AnalyticClass};

/// Inclusive, evenly spaced range of one named parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: &str, start: f64, stop: f64, steps: usize) -> Self {
        Self { param: param.to_string(), start, stop, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| if k + 1 == self.steps { self.stop } else { self.start + h * k as f64 }).collect()
    }
}

/// Returns `base` with `param` replaced by `value`.
pub fn with_param(base: &ModelSpec, param: &str, value: f64) -> Result<ModelSpec> {
    let mut m = *base;
    match &mut m {
        ModelSpec::Wdrcm { profile, kernel, beta } => match param {
            "gamma" => kernel.gamma = value,
            "gamma_prime" => kernel.gamma_prime = value,
            "beta" => *beta = value,
            "p" => match profile {
                Profile::LongRange { p, .. } | Profile::ShortRange { p } => *p = value,
            },
            "delta" => match profile {
                Profile::LongRange { delta, .. } => *delta = value,
                Profile::ShortRange { .. } => return Err(invalid("the short-range profile has no delta")),
            },
            _ => return Err(invalid(format!("unknown wdrcm parameter '{param}'"))),
        },
        ModelSpec::Interference { gamma, delta, xi, lambda_env, .. } => match param {
            "gamma" => *gamma = value,
            "delta" => *delta = value,
            "xi" => *xi = value,
            "lambda_env" => *lambda_env = value,
            _ => return Err(invalid(format!("unknown interference parameter '{param}'"))),
        },
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub x: f64,
    pub y: f64,
    /// `None` when the point is invalid or has no closed form; see `note`.
    pub class: Option<AnalyticClass>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_axis: Axis,
    pub y_axis: Axis,
    /// Row-major: `cells[j * x_steps + i]` is `(x_i, y_j)`.
    pub cells: Vec<PhaseCell>,
    /// The `δ_eff = 2` curve `γ = (δ + ξ - 1)/δ` as `(x, y)` points, for the
    /// interference family when γ is on an axis.
    pub boundary: Option<Vec<(f64, f64)>>,
}

impl PhaseGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.y_axis.values().len(), self.x_axis.values().len())
    }

    pub fn cell(&self, row: usize, col: usize) -> &PhaseCell {
        &self.cells[row * self.x_axis.values().len() + col]
    }
}

pub fn phase_grid(base: &ModelSpec, x_axis: &Axis, y_axis: &Axis) -> Result<PhaseGrid> {
    if x_axis.param == y_axis.param {
        return Err(invalid("the two axes must vary different parameters"));
    }
    with_param(base, &x_axis.param, x_axis.start)?;
    with_param(base, &y_axis.param, y_axis.start)?;
    let xs = x_axis.values();
    let ys = y_axis.values();
    let cells = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(x, y)| {
            let model = with_param(base, &x_axis.param, x).and_then(|m| with_param(&m, &y_axis.param, y));
            match model.and_then(|m| analytic_classify(&m)) {
                Ok(class) => PhaseCell { x, y, class: Some(class), note: None },
                Err(e) => PhaseCell { x, y, class: None, note: Some(e.to_string()) },
            }
        })
        .collect();
    let boundary = interference_boundary(base, x_axis, y_axis);
    Ok(PhaseGrid { x_axis: x_axis.clone(), y_axis: y_axis.clone(), cells, boundary })
}

fn interference_boundary(base: &ModelSpec, x_axis: &Axis, y_axis: &Axis) -> Option<Vec<(f64, f64)>> {
    let ModelSpec::Interference { delta, xi, .. } = *base else {
        return None;
    };
    let gamma_on_x = x_axis.param == "gamma";
    let (gamma_axis, other) = if gamma_on_x { (x_axis, y_axis) } else { (y_axis, x_axis) };
    if gamma_axis.param != "gamma" {
        return None;
    }
    let fine = Axis { steps: 200, ..other.clone() };
    let points = fine
        .values()
        .into_iter()
        .filter_map(|v| {
            let (d, x) = match other.param.as_str() {
                "delta" => (v, xi),
                "xi" => (delta, v),
                _ => (delta, xi),
            };
            let g = (d + x - 1.0) / d;
            (0.0..1.0).contains(&g).then_some(if gamma_on_x { (g, v) } else { (v, g) })
        })
        .collect();
    Some(points)
}

/// Heat map of the `δ_eff > 2` verdicts with the analytic boundary overlaid.
pub fn phase_svg(grid: &PhaseGrid) -> String {
    let (w, h, pad) = (480.0, 480.0, 48.0);
    let xs = grid.x_axis.values();
    let ys = grid.y_axis.values();
    let span = |v: &[f64]| {
        let lo = v.first().copied().unwrap_or(0.0);
        let hi = v.last().copied().unwrap_or(1.0);
        if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let cw = w / xs.len() as f64;
    let ch = h / ys.len() as f64;
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - cw) + cw / 2.0;
    let py = |y: f64| pad + h - ((y - y0) / (y1 - y0) * (h - ch) + ch / 2.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#,
        w + 2.0 * pad,
        h + 2.0 * pad
    );
    for c in &grid.cells {
        let fill = match &c.class {
            Some(k) if k.deff_gt2 => "#4c9a5b",
            Some(_) => "#c8553d",
            None => "#bbbbbb",
        };
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            px(c.x) - cw / 2.0,
            py(c.y) - ch / 2.0,
            cw,
            ch
        );
    }
    if let Some(curve) = &grid.boundary {
        let pts: Vec<String> = curve.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#, pts.join(" "));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, pad + w / 2.0, h + 2.0 * pad - 12.0, grid.x_axis.param);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        pad + h / 2.0,
        pad + h / 2.0,
        grid.y_axis.param
    );
    s.push_str("</svg>\n");
    s
}
