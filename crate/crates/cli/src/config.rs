//! Run configuration. Every block rejects unknown keys.

use perc_core::deff::Axis;
use perc_core::estimate::{DEFAULT_CENSOR_CAP, DEFAULT_LEVEL};
use perc_core::events::EventSpec;
use perc_core::graphgen::{PairScope, WindowPolicy};
use perc_core::pointproc::SamplingLimits;
use perc_core::{ModelSpec, Region};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_ID: &str = "run-config.v1";
pub const MANIFEST_ID: &str = "run-manifest.v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_id")]
    pub schema: String,
    pub model: ModelSpec,
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub policy: WindowPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deff: Option<DeffBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyBlock>,
}

fn schema_id() -> String {
    SCHEMA_ID.to_string()
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

fn default_censor_cap() -> f64 {
    DEFAULT_CENSOR_CAP
}

fn default_c2() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    pub window: Region,
    pub lambda: f64,
    #[serde(default)]
    pub palm: bool,
    #[serde(default)]
    pub scope: PairScope,
    #[serde(default)]
    pub limits: SamplingLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// The event family; its `alpha` is replaced by each grid value.
    pub event: EventSpec,
    pub alpha_grid: Vec<f64>,
    pub lambda: f64,
    pub n_reps: u64,
    /// Also write one CSV row per replication.
    #[serde(default)]
    pub trials: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeffBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseBlock {
    pub x_axis: Axis,
    pub y_axis: Axis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterStatistic {
    /// `d`-th power of the cluster's radius about the palm vertex.
    Diameter,
    /// Number of vertices.
    Size,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBlock {
    pub statistic: ClusterStatistic,
    /// Radius of the ball window around the palm vertex.
    pub window_radius: f64,
    pub lambda: f64,
    pub n_reps: u64,
    pub k: usize,
    #[serde(default = "default_censor_cap")]
    pub censor_cap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingBlock {
    pub alpha: f64,
    pub separation: f64,
    pub lambda: f64,
    pub n_reps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyBlock {
    pub alpha_grid: Vec<f64>,
    pub lambda: f64,
    pub n_reps: u64,
    pub decay_exp: f64,
    #[serde(default = "default_c2")]
    pub c2: f64,
}

/// Parses either a config file or a manifest written by an earlier run.
/// For a manifest, the embedded config and its recorded subcommand are
/// returned.
pub fn parse(text: &str) -> Result<(RunConfig, Option<String>), String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let is_manifest = value.get("manifest").and_then(Value::as_str) == Some(MANIFEST_ID);
    let (body, sub) = if is_manifest {
        let sub = value.get("subcommand").and_then(Value::as_str).map(str::to_string);
        (value.get("config").cloned().ok_or("manifest has no config")?, sub)
    } else {
        (value, None)
    };
    let cfg: RunConfig = serde_json::from_value(body).map_err(|e| format!("invalid config: {e}"))?;
    if cfg.schema != SCHEMA_ID {
        return Err(format!("unsupported schema {:?}, expected {SCHEMA_ID:?}", cfg.schema));
    }
    Ok((cfg, sub))
}
