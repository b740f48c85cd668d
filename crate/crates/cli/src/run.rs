use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use perc_core::deff::{deff_estimate, default_mus, default_n_grid, phase_grid, phase_svg, DeffReport};
use perc_core::estimate::{
    mixing_cov, multiscale_certificate, replicate, sweep, sweep_with_trials, tail_exponent, EstimateOptions,
};
use perc_core::events::{palm_statistics, EventSpec};
use perc_core::graphgen::{sample_graph_with, sample_palm, PairMode, SampleOptions};
use perc_core::io::{write_edges_csv, write_json, write_phase_csv, write_series_csv, write_trials_csv, write_vertices_csv, GraphEnvelope};
use perc_core::{Error, ModelSpec, Region, RngStream};
use serde::Serialize;
use serde_json::json;

use crate::config::{self, ClusterStatistic, RunConfig, MANIFEST_ID};
use crate::{Cli, Subcommand};

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn io_failure(e: impl fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Named output files, held in memory until the whole run has succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> perc_core::Result<()>) -> Result<(), Failure> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        self.add(name, |b| write_json(value, b))
    }
}

fn missing(block: &str) -> Failure {
    Failure::Config(format!("config has no \"{block}\" block"))
}

fn validate(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.dimension == 0 {
        return Err(Failure::Config("dimension must be positive".into()));
    }
    cfg.model.validate()?;
    cfg.policy.validate()?;
    if let ModelSpec::Interference { dimension, .. } = cfg.model {
        if dimension != cfg.dimension {
            return Err(Failure::Config(format!("interference dimension {dimension} differs from dimension {}", cfg.dimension)));
        }
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Failure::Config(format!("level = {} must lie in (0, 1)", cfg.level)));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<(), Failure> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!("lambda = {lambda} must be finite and non-negative")))
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let start = Instant::now();
    let text = fs::read_to_string(&cli.config).map_err(|e| Failure::Config(format!("{}: {e}", cli.config.display())))?;
    let (mut cfg, recorded) = config::parse(&text).map_err(Failure::Config)?;
    if let Some(sub) = recorded {
        if sub != cli.subcommand.name() {
            return Err(Failure::Config(format!("manifest was written by `{sub}`, not `{}`", cli.subcommand.name())));
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    validate(&cfg)?;

    let pool = match cli.threads {
        Some(0) => return Err(Failure::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(io_failure)?;
    let outputs = pool.install(|| execute(cli.subcommand, &cfg))?;

    let manifest = json!({
        "manifest": MANIFEST_ID,
        "subcommand": cli.subcommand.name(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "core_version": perc_core::VERSION,
        "seed": cfg.seed,
        "threads": pool.current_num_threads(),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "outputs": outputs.files.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        "config": cfg,
    });
    let mut files = outputs.files;
    let mut buf = Vec::new();
    write_json(&manifest, &mut buf)?;
    files.push(("manifest.json".into(), buf));
    persist(&cli.out, &files)
}

/// Writes each file through a temporary sibling and a rename.
fn persist(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io_failure)?;
    for (name, bytes) in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_failure)?;
        tmp.write_all(bytes).map_err(io_failure)?;
        tmp.as_file().sync_all().map_err(io_failure)?;
        tmp.persist(dir.join(name)).map_err(io_failure)?;
    }
    Ok(())
}

fn options(cfg: &RunConfig) -> EstimateOptions {
    EstimateOptions { dimension: cfg.dimension, level: cfg.level, policy: cfg.policy.clone() }
}

#[derive(Serialize)]
struct DeffOutput<'a> {
    deff_hat: f64,
    #[serde(flatten)]
    report: &'a DeffReport,
}

fn execute(sub: Subcommand, cfg: &RunConfig) -> Result<Outputs, Failure> {
    let rng = RngStream::root(cfg.seed);
    let d = cfg.dimension;
    let mut out = Outputs::default();
    match sub {
        Subcommand::Sample => {
            let b = cfg.sample.as_ref().ok_or_else(|| missing("sample"))?;
            check_lambda(b.lambda)?;
            if b.window.dim() != d {
                return Err(Failure::Config(format!("window dimension {} differs from dimension {d}", b.window.dim())));
            }
            let opts = SampleOptions { policy: cfg.policy.clone(), scope: b.scope.clone(), mode: PairMode::Pruned, limits: b.limits };
            let g = sample_graph_with(&cfg.model, &b.window, b.lambda, &rng, &opts, b.palm)?;
            out.add("vertices.csv", |w| write_vertices_csv(&g, w))?;
            out.add("edges.csv", |w| write_edges_csv(&g, w))?;
            out.json("graph.json", &GraphEnvelope::of(&g))?;
        }
        Subcommand::Sweep => {
            let b = cfg.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
            check_lambda(b.lambda)?;
            b.event.validate(d)?;
            let (series, trials) = sweep_with_trials(&cfg.model, &b.event, &b.alpha_grid, b.lambda, b.n_reps, &rng, &options(cfg))?;
            out.add("series.csv", |w| write_series_csv(&series, w))?;
            out.json("series.json", &series)?;
            if b.trials {
                out.add("trials.csv", |w| write_trials_csv(&trials, w))?;
            }
        }
        Subcommand::Deff => {
            let b = cfg.deff.clone().unwrap_or_default();
            let mus = b.mus.unwrap_or_else(default_mus);
            let n_grid = b.n_grid.unwrap_or_else(default_n_grid);
            let report = deff_estimate(&cfg.model, &mus, &n_grid)?;
            out.json("deff.json", &DeffOutput { deff_hat: report.deff_hat(), report: &report })?;
        }
        Subcommand::Phase => {
            let b = cfg.phase.as_ref().ok_or_else(|| missing("phase"))?;
            let grid = phase_grid(&cfg.model, &b.x_axis, &b.y_axis)?;
            out.add("phase.csv", |w| write_phase_csv(&grid, w))?;
            out.json("phase.json", &grid)?;
            out.files.push(("phase.svg".into(), phase_svg(&grid).into_bytes()));
        }
        Subcommand::Tail => {
            let b = cfg.tail.as_ref().ok_or_else(|| missing("tail"))?;
            check_lambda(b.lambda)?;
            let window = Region::centered_ball(d, b.window_radius)?;
            let samples = replicate(b.n_reps, &rng, |s| {
                let g = sample_palm(&cfg.model, &window, b.lambda, s, &cfg.policy)?;
                let stats = palm_statistics(&g)?;
                let value = match b.statistic {
                    ClusterStatistic::Diameter => stats.diameter_pow,
                    ClusterStatistic::Size => stats.size as f64,
                };
                Ok((value, stats.censored))
            })?;
            let mut csv = String::from("value,censored\n");
            for (v, c) in &samples {
                csv.push_str(&format!("{v},{}\n", u8::from(*c)));
            }
            out.files.push(("tail_samples.csv".into(), csv.into_bytes()));
            let report = tail_exponent(&samples, b.k, b.censor_cap)?;
            out.json("tail.json", &report)?;
        }
        Subcommand::Mixing => {
            let b = cfg.mixing.as_ref().ok_or_else(|| missing("mixing"))?;
            check_lambda(b.lambda)?;
            let est = mixing_cov(&cfg.model, b.alpha, b.separation, b.lambda, b.n_reps, &rng, &options(cfg))?;
            out.json("mixing.json", &est)?;
        }
        Subcommand::Certify => {
            let b = cfg.certify.as_ref().ok_or_else(|| missing("certify"))?;
            check_lambda(b.lambda)?;
            let first = *b.alpha_grid.first().ok_or_else(|| Failure::Config("alpha_grid is empty".into()))?;
            let series = sweep(&cfg.model, &EventSpec::g(first), &b.alpha_grid, b.lambda, b.n_reps, &rng, &options(cfg))?;
            let report = multiscale_certificate(&series, b.lambda, b.decay_exp, b.c2, d)?;
            out.add("series.csv", |w| write_series_csv(&series, w))?;
            out.json("certificate.json", &report)?;
        }
    }
    Ok(out)
}
