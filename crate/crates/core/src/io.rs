//! CSV and JSON encodings of samples, trials, series and phase grids.
//!
//! Writers take any `Write`; the caller decides where bytes land. Floats are
//! printed with the shortest representation that parses back to the same
//! value, so files are byte-stable across runs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::deff::{Exponent, PhaseGrid};
use crate::error::Result;
use crate::estimate::{EstimateSeries, TrialRecord};
use crate::graphgen::{GraphSample, Provenance};
use crate::pointproc::{PointCloud, Region};

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn opt_exp(e: Option<Exponent>) -> String {
    e.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_series_csv<W: Write>(series: &EstimateSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "p_hat", "ci_lo", "ci_hi", "n_reps"])?;
    for row in &series.rows {
        let e = &row.estimate;
        w.write_record([
            row.alpha.to_string(),
            e.p_hat.to_string(),
            e.ci_lo.to_string(),
            e.ci_hi.to_string(),
            e.n_reps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials_csv<W: Write>(trials: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["event", "alpha", "lambda", "seed", "outcome", "censored"])?;
    for t in trials {
        w.write_record([
            t.event.clone(),
            t.alpha.to_string(),
            t.lambda.to_string(),
            t.seed.to_string(),
            bit(t.outcome).to_string(),
            bit(t.censored).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per cell; unclassified cells leave every verdict column empty.
pub fn write_phase_csv<W: Write>(grid: &PhaseGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([grid.x_axis.param.as_str(), grid.y_axis.param.as_str(), "deff_gt2", "deff_value", "mu_bar", "zeta"])?;
    for c in &grid.cells {
        let (gt2, deff, mu, zeta) = match &c.class {
            Some(k) => (bit(k.deff_gt2).to_string(), opt_exp(k.deff_value), opt_exp(k.mu_bar), opt_exp(k.zeta)),
            None => Default::default(),
        };
        w.write_record([c.x.to_string(), c.y.to_string(), gt2, deff, mu, zeta])?;
    }
    w.flush()?;
    Ok(())
}

fn coord_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|k| format!("x_{k}")).collect()
}

pub fn write_cloud_csv<W: Write>(cloud: &PointCloud, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = coord_header(cloud.dim());
    header.push("mark".into());
    w.write_record(&header)?;
    for i in 0..cloud.len() {
        let mut rec: Vec<String> = cloud.location(i).iter().map(f64::to_string).collect();
        rec.push(cloud.mark(i).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudEnvelope {
    pub d: usize,
    pub region: Region,
    pub lambda: f64,
    pub seed: u64,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEnvelope {
    pub d: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub palm_index: Option<usize>,
    pub provenance: Provenance,
}

impl GraphEnvelope {
    pub fn of(g: &GraphSample) -> Self {
        Self {
            d: g.dim(),
            n_vertices: g.len(),
            n_edges: g.edge_count(),
            palm_index: g.palm_index(),
            provenance: g.provenance().clone(),
        }
    }
}

pub fn write_vertices_csv<W: Write>(g: &GraphSample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string()];
    header.extend(coord_header(g.dim()));
    header.extend(["mark".to_string(), "is_palm".to_string()]);
    w.write_record(&header)?;
    let cloud = g.cloud();
    for i in 0..g.len() {
        let mut rec = vec![i.to_string()];
        rec.extend(cloud.location(i).iter().map(f64::to_string));
        rec.push(cloud.mark(i).to_string());
        rec.push(bit(g.palm_index() == Some(i)).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edges_csv<W: Write>(g: &GraphSample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id_a", "id_b"])?;
    for (a, b) in g.edges() {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deff::{phase_grid, Axis};
    use crate::estimate::{Estimate, SeriesRow};
    use crate::models::ModelSpec;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn series_columns() {
        let rows = vec![SeriesRow { alpha: 2.0, estimate: Estimate::wilson(0, 10, 0.95).unwrap() }];
        let s = EstimateSeries::from_rows("G", 0.0, 0.95, rows).unwrap();
        let out = text(|b| write_series_csv(&s, b));
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("alpha,p_hat,ci_lo,ci_hi,n_reps"));
        assert!(lines.next().unwrap().starts_with("2,0,0,"));
    }

    #[test]
    fn trial_columns() {
        let t = TrialRecord { event: "H".into(), alpha: 4.0, lambda: 0.5, seed: 9, replication: 3, outcome: true, censored: false };
        let out = text(|b| write_trials_csv(&[t], b));
        assert_eq!(out, "event,alpha,lambda,seed,outcome,censored\nH,4,0.5,9,1,0\n");
    }

    #[test]
    fn phase_rows_keep_unclassified_cells() {
        let base = ModelSpec::long_range(0.0, 0.0, 3.0).unwrap();
        let g = phase_grid(&base, &Axis::new("gamma", 0.5, 1.5, 2), &Axis::new("delta", 3.0, 3.0, 1)).unwrap();
        let out = text(|b| write_phase_csv(&g, b));
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "gamma,delta,deff_gt2,deff_value,mu_bar,zeta");
        assert_eq!(lines[1], "0.5,3,1,2.5,0.33333333333333326,inf");
        assert_eq!(lines[2], "1.5,3,,,,");
    }

    #[test]
    fn cloud_columns() {
        let c = PointCloud::from_parts(2, vec![0.5, -1.0], vec![0.25], None).unwrap();
        assert_eq!(text(|b| write_cloud_csv(&c, b)), "x_1,x_2,mark\n0.5,-1,0.25\n");
    }
}
