//! Run configuration documents (schema 1).
//!
//! A document is a JSON object with `"schema": 1`, a `"command"` tag and the
//! fields of that command. See `docs/config.md` for the full reference.

use std::path::Path;

use phasefield_core::experiments::RegimeSweepConfig;
use phasefield_core::homog::TailQuantity;
use phasefield_core::media::{CellLaw, MediumSpec};
use phasefield_core::solver::MinimizeOptions;
use phasefield_core::wells::DoubleWell;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema: u32,
    #[serde(flatten)]
    pub run: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Sigma(SigmaConfig),
    Solve(SolveConfig),
    Sweep(RegimeSweepConfig),
    Tails(TailsConfig),
    Liouville(LiouvilleConfig),
    Lamp(LampConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Sigma(_) => "sigma",
            RunConfig::Solve(_) => "solve",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::Tails(_) => "tails",
            RunConfig::Liouville(_) => "liouville",
            RunConfig::Lamp(_) => "lamp",
        }
    }

    pub fn seed0(&self) -> u64 {
        match self {
            RunConfig::Sigma(_) => 0,
            RunConfig::Solve(c) => c.seed,
            RunConfig::Sweep(c) => c.seed0,
            RunConfig::Tails(c) => c.seed0,
            RunConfig::Liouville(c) => c.seed0,
            RunConfig::Lamp(c) => c.seed0,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            RunConfig::Sigma(_) => {}
            RunConfig::Solve(c) => c.seed = seed,
            RunConfig::Sweep(c) => c.seed0 = seed,
            RunConfig::Tails(c) => c.seed0 = seed,
            RunConfig::Liouville(c) => c.seed0 = seed,
            RunConfig::Lamp(c) => c.seed0 = seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    #[serde(default)]
    pub well: DoubleWell,
    pub law: CellLaw,
}

/// Medium of a single solve. Random media are sampled over the window
/// needed by `(ρ, δ)` with the run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolveMedium {
    Constant {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        theta: f64,
    },
    Checkerboard {
        law: CellLaw,
    },
    Lamp {
        alpha: f64,
    },
    /// Fully specified medium; its window must cover the domain.
    Spec {
        spec: MediumSpec,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub eps: f64,
    pub delta: f64,
    #[serde(default = "half")]
    pub rho: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub well: DoubleWell,
    pub medium: SolveMedium,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub minimize: MinimizeOptions,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuKeyword {
    Auto,
}

/// Tail threshold: a number, or `"auto"` for calibration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuSetting {
    Value(f64),
    Keyword(NuKeyword),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsConfig {
    pub quantity: TailQuantity,
    pub law: CellLaw,
    pub radii: Vec<f64>,
    /// Defaults to twice the largest radius.
    #[serde(default)]
    pub r_max: Option<f64>,
    pub nu: NuSetting,
    pub n_samples: usize,
    /// Calibration target for `P̂` at the largest radius.
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_p_range")]
    pub p_range: [f64; 2],
    #[serde(default)]
    pub seed0: u64,
}

fn default_target() -> f64 {
    0.01
}

fn default_p_range() -> [f64; 2] {
    [1e-3, 0.5]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiouvilleConfig {
    pub n_max: usize,
    #[serde(default)]
    pub strip_indices: Vec<u64>,
    /// Base point, converted exactly from the given binary floats.
    #[serde(default)]
    pub base_point: [f64; 2],
    pub rho: f64,
    pub m_list: Vec<u32>,
    /// Torus points of the membership estimate (0 skips it).
    #[serde(default)]
    pub torus_points: u64,
    #[serde(default)]
    pub seed0: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LampConfig {
    pub alpha: f64,
    pub window_len: i64,
    pub n_windows: usize,
    pub lengths: Vec<u32>,
    #[serde(default)]
    pub seed0: u64,
}

/// Parses and validates a document.
pub fn parse_document(bytes: &[u8]) -> Result<Document, CliError> {
    let doc: Document = serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))?;
    validate(&doc)?;
    Ok(doc)
}

pub fn load(path: &Path) -> Result<Document, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_document(&bytes)
}

pub fn validate(doc: &Document) -> Result<(), CliError> {
    if doc.schema != SCHEMA_VERSION {
        return Err(CliError::Config(format!("unsupported schema {} (expected {SCHEMA_VERSION})", doc.schema)));
    }
    let bad = |m: &str| Err(CliError::Config(m.to_string()));
    match &doc.run {
        RunConfig::Sigma(c) => c.well.validate().map_err(CliError::from_config)?,
        RunConfig::Solve(c) => {
            if !(c.eps > 0.0 && c.delta > 0.0 && c.rho > 0.0) {
                return bad("solve needs eps, delta, rho > 0");
            }
            c.well.validate().map_err(CliError::from_config)?;
        }
        RunConfig::Sweep(c) => c.validate().map_err(CliError::from_config)?,
        RunConfig::Tails(c) => {
            if c.radii.is_empty() || c.radii.iter().any(|r| !(*r >= 1.0)) {
                return bad("tails needs radii ≥ 1");
            }
            if c.n_samples < 100 {
                return bad("tails needs n_samples ≥ 100");
            }
            if let Some(rm) = c.r_max {
                if c.radii.iter().any(|r| *r > rm) {
                    return bad("r_max below a radius");
                }
            }
            if !(c.target > 0.0 && c.target < 1.0 && c.p_range[0] < c.p_range[1]) {
                return bad("target must lie in (0, 1) and p_range must be increasing");
            }
        }
        RunConfig::Liouville(c) => {
            if c.n_max < 2 || c.m_list.is_empty() || !(c.rho > 0.0) {
                return bad("liouville needs n_max ≥ 2, rho > 0 and a nonempty m_list");
            }
        }
        RunConfig::Lamp(c) => {
            let n_max = c.lengths.iter().copied().max().unwrap_or(0) as i64;
            if c.lengths.is_empty() || c.window_len < 2 * n_max + 1 || c.n_windows == 0 || !(c.alpha > 0.0) {
                return bad("lamp needs alpha > 0, lengths, windows and window_len ≥ 2·max N + 1");
            }
        }
    }
    Ok(())
}

/// Canonical bytes of a document: pretty JSON with a trailing newline.
pub fn canonical_bytes(doc: &Document) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(doc).expect("documents serialize");
    v.push(b'\n');
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_document_round_trips() {
        let text = r#"{
            "schema": 1, "command": "sweep",
            "law": {"atoms": [{"a": 1, "theta": 1, "weight": 1}, {"a": 4, "theta": 2, "weight": 1}]},
            "eps_grid": [0.1, 0.05], "scaling": {"family": "power", "beta": 3},
            "rho": 0.25, "n_samples": 8, "seed0": 4
        }"#;
        let doc = parse_document(text.as_bytes()).unwrap();
        assert_eq!(doc.run.command(), "sweep");
        let again = parse_document(&canonical_bytes(&doc)).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn schema_and_fields_are_checked() {
        assert!(parse_document(br#"{"schema": 2, "command": "lamp", "alpha": 1, "window_len": 99, "n_windows": 1, "lengths": [4]}"#).is_err());
        assert!(parse_document(br#"{"schema": 1, "command": "lamp", "alpha": 1, "window_len": 5, "n_windows": 1, "lengths": [4]}"#).is_err());
        let nu: NuSetting = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(nu, NuSetting::Keyword(NuKeyword::Auto));
    }
}
