//! Command-line surface. Every subcommand takes either a config file or
//! its own flags, never both; `--seed`, `--out` and `--jobs` apply to all.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use phasefield_core::experiments::RegimeSweepConfig;
use phasefield_core::homog::{Scaling, TailQuantity};
use phasefield_core::media::CellLaw;
use phasefield_core::wells::DoubleWell;

use crate::config::{
    self, Document, LampConfig, LiouvilleConfig, NuKeyword, NuSetting, RunConfig, SigmaConfig, SolveConfig, SolveMedium,
    TailsConfig, SCHEMA_VERSION,
};
use crate::error::CliError;
use crate::output::{resolve_out_dir, RunDir};

#[derive(Debug, Parser)]
#[command(name = "phasefield", version, about = "Heterogeneous Allen-Cahn cell problems and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the reference surface tensions of a well and a cell law.
    Sigma(SigmaArgs),
    /// Minimize one cell problem.
    Solve(SolveArgs),
    /// Median cell energies over an ε grid.
    Sweep(SweepArgs),
    /// Tail probabilities of Sub or Osc.
    Tails(TailsArgs),
    /// Liouville stripe construction and excursions.
    Liouville(LiouvilleArgs),
    /// Run-length tails of lamp stripes against an i.i.d. control.
    Lamp(LampArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration document; excludes the command's own flags.
    pub config: Option<PathBuf>,
    /// Master seed, overriding the document.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (PHASEFIELD_OUT takes precedence).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct LawArgs {
    /// Values of `a`, uniform and independent of `θ`.
    #[arg(long, value_delimiter = ',')]
    pub a_law: Option<Vec<f64>>,
    /// Values of `θ`, uniform.
    #[arg(long, value_delimiter = ',')]
    pub theta_law: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    #[command(flatten)]
    pub common: Common,
    /// `quartic` or `tilted:b,c`.
    #[arg(long)]
    pub well: Option<String>,
    #[command(flatten)]
    pub law: LawArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// `constant`, `checkerboard` or `lamp`.
    #[arg(long)]
    pub medium: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Defaults to ε².
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub center: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub well: Option<String>,
    #[command(flatten)]
    pub law: LawArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,
    /// Exponent of `δ = ε^β`.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub well: Option<String>,
    #[command(flatten)]
    pub law: LawArgs,
}

#[derive(Debug, Args)]
pub struct TailsArgs {
    #[command(flatten)]
    pub common: Common,
    /// `sub` or `osc`.
    #[arg(long)]
    pub quantity: Option<String>,
    #[arg(long = "r", value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Threshold, or `auto`.
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub target: Option<f64>,
    #[command(flatten)]
    pub law: LawArgs,
}

#[derive(Debug, Args)]
pub struct LiouvilleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub strips: Option<Vec<u64>>,
    /// Base point `x1,x2`.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Stretch multiples `M`.
    #[arg(long = "m", value_delimiter = ',')]
    pub m_list: Option<Vec<u32>>,
    #[arg(long)]
    pub torus_points: Option<u64>,
}

#[derive(Debug, Args)]
pub struct LampArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<u32>>,
    #[arg(long)]
    pub windows: Option<usize>,
    #[arg(long)]
    pub window_len: Option<i64>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sigma(_) => "sigma",
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Tails(_) => "tails",
            Command::Liouville(_) => "liouville",
            Command::Lamp(_) => "lamp",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Sigma(a) => &a.common,
            Command::Solve(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Tails(a) => &a.common,
            Command::Liouville(a) => &a.common,
            Command::Lamp(a) => &a.common,
        }
    }
}

/// Parses, validates and runs; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let name = cli.command.name();
    let common = cli.command.common();
    let doc = match document(&cli.command) {
        Ok(d) => d,
        Err(e) => return crate::fail_early(common.out.as_deref(), name, e),
    };
    let dir = match RunDir::create(resolve_out_dir(common.out.as_deref(), name)) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{name}: {e}");
            return e.exit_code();
        }
    };
    crate::execute(&doc, &dir, common.jobs)
}

/// The validated document a command line describes.
pub fn document(cmd: &Command) -> Result<Document, CliError> {
    let common = cmd.common();
    let mut doc = match &common.config {
        Some(path) => {
            if has_flags(cmd) {
                return Err(CliError::Config("give either a config file or command flags, not both".into()));
            }
            let doc = config::load(path)?;
            if doc.run.command() != cmd.name() {
                return Err(CliError::Config(format!(
                    "{} holds a {} config, not {}",
                    path.display(),
                    doc.run.command(),
                    cmd.name()
                )));
            }
            doc
        }
        None => Document { schema: SCHEMA_VERSION, run: from_flags(cmd)? },
    };
    if let Some(s) = common.seed {
        doc.run.set_seed(s);
    }
    config::validate(&doc)?;
    Ok(doc)
}

fn has_flags(cmd: &Command) -> bool {
    let law = |l: &LawArgs| l.a_law.is_some() || l.theta_law.is_some();
    match cmd {
        Command::Sigma(a) => a.well.is_some() || law(&a.law),
        Command::Solve(a) => {
            a.medium.is_some()
                || a.eps.is_some()
                || a.delta.is_some()
                || a.rho.is_some()
                || a.center.is_some()
                || a.alpha.is_some()
                || a.well.is_some()
                || law(&a.law)
        }
        Command::Sweep(a) => {
            a.eps_grid.is_some() || a.beta.is_some() || a.rho.is_some() || a.samples.is_some() || a.well.is_some() || law(&a.law)
        }
        Command::Tails(a) => {
            a.quantity.is_some()
                || a.radii.is_some()
                || a.r_max.is_some()
                || a.nu.is_some()
                || a.samples.is_some()
                || a.target.is_some()
                || law(&a.law)
        }
        Command::Liouville(a) => {
            a.n_max.is_some() || a.strips.is_some() || a.x.is_some() || a.rho.is_some() || a.m_list.is_some() || a.torus_points.is_some()
        }
        Command::Lamp(a) => a.alpha.is_some() || a.lengths.is_some() || a.windows.is_some() || a.window_len.is_some(),
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_well(s: Option<&str>) -> Result<DoubleWell, CliError> {
    match s {
        None | Some("quartic") => Ok(DoubleWell::Quartic),
        Some("tilted") => Ok(DoubleWell::TILTED_DEFAULT),
        Some(t) => {
            let rest = t.strip_prefix("tilted:").ok_or_else(|| bad(format!("unknown well '{t}'")))?;
            let v: Vec<f64> = rest.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| bad(e.to_string()))?;
            match v[..] {
                [b, c] => DoubleWell::tilted(b, c).map_err(CliError::from_config),
                _ => Err(bad("tilted well takes two parameters b,c")),
            }
        }
    }
}

/// Product law from the flags, or `default` when both are absent.
fn law_from(l: &LawArgs, default: (&[f64], &[f64])) -> Result<CellLaw, CliError> {
    let a = l.a_law.as_deref().unwrap_or(default.0);
    let t = l.theta_law.as_deref().unwrap_or(default.1);
    CellLaw::product(a, t).map_err(CliError::from_config)
}

const CHECKERBOARD: (&[f64], &[f64]) = (&[1.0, 4.0], &[1.0, 2.0]);

fn from_flags(cmd: &Command) -> Result<RunConfig, CliError> {
    Ok(match cmd {
        Command::Sigma(a) => {
            RunConfig::Sigma(SigmaConfig { well: parse_well(a.well.as_deref())?, law: law_from(&a.law, (&[1.0], &[1.0]))? })
        }
        Command::Solve(a) => {
            let eps = a.eps.ok_or_else(|| bad("solve needs --eps or a config file"))?;
            let medium = match a.medium.as_deref().unwrap_or("constant") {
                "constant" => {
                    let law = law_from(&a.law, (&[1.0], &[1.0]))?;
                    if !law.is_constant() {
                        return Err(bad("a constant medium takes single --a-law and --theta-law values"));
                    }
                    let c = law.atoms()[0];
                    SolveMedium::Constant { a: c.a, theta: c.theta }
                }
                "checkerboard" => SolveMedium::Checkerboard { law: law_from(&a.law, CHECKERBOARD)? },
                "lamp" => SolveMedium::Lamp { alpha: a.alpha.unwrap_or(1.0) },
                m => return Err(bad(format!("unknown medium '{m}'"))),
            };
            RunConfig::Solve(SolveConfig {
                eps,
                delta: a.delta.unwrap_or(eps * eps),
                rho: a.rho.unwrap_or(0.5),
                center: a.center.unwrap_or(0.0),
                well: parse_well(a.well.as_deref())?,
                medium,
                seed: 0,
                minimize: Default::default(),
            })
        }
        Command::Sweep(a) => RunConfig::Sweep(RegimeSweepConfig {
            law: law_from(&a.law, CHECKERBOARD)?,
            well: parse_well(a.well.as_deref())?,
            eps_grid: a.eps_grid.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.02]),
            scaling: Scaling::Power { beta: a.beta.unwrap_or(3.0), prefactor: 1.0 },
            rho: a.rho.unwrap_or(0.25),
            n_samples: a.samples.unwrap_or(32),
            seed0: 0,
            center: 0.0,
            minimize: Default::default(),
        }),
        Command::Tails(a) => {
            let quantity = match a.quantity.as_deref().unwrap_or("osc") {
                "osc" => TailQuantity::Osc,
                "sub" => TailQuantity::Sub,
                q => return Err(bad(format!("unknown quantity '{q}'"))),
            };
            let nu = match a.nu.as_deref().unwrap_or("auto") {
                "auto" => NuSetting::Keyword(NuKeyword::Auto),
                v => NuSetting::Value(v.parse().map_err(|_| bad(format!("bad --nu '{v}'")))?),
            };
            RunConfig::Tails(TailsConfig {
                quantity,
                law: law_from(&a.law, CHECKERBOARD)?,
                radii: a.radii.clone().unwrap_or_else(|| vec![8.0, 16.0, 32.0]),
                r_max: a.r_max,
                nu,
                n_samples: a.samples.unwrap_or(DEFAULT_TAIL_SAMPLES),
                target: a.target.unwrap_or(0.01),
                p_range: [1e-3, 0.5],
                seed0: 0,
            })
        }
        Command::Liouville(a) => {
            let x = a.x.clone().unwrap_or_else(|| vec![0.1, 0.2]);
            let base_point = match x[..] {
                [x1, x2] => [x1, x2],
                _ => return Err(bad("--x takes two coordinates")),
            };
            RunConfig::Liouville(LiouvilleConfig {
                n_max: a.n_max.unwrap_or(4),
                strip_indices: a.strips.clone().unwrap_or_default(),
                base_point,
                rho: a.rho.unwrap_or(1.0),
                m_list: a.m_list.clone().unwrap_or_else(|| vec![1, 2, 3, 4]),
                torus_points: a.torus_points.unwrap_or(0),
                seed0: 0,
            })
        }
        Command::Lamp(a) => RunConfig::Lamp(LampConfig {
            alpha: a.alpha.unwrap_or(1.0),
            window_len: a.window_len.unwrap_or(100_000),
            n_windows: a.windows.unwrap_or(200),
            lengths: a.lengths.clone().unwrap_or_else(|| DEFAULT_LAMP_LENGTHS.to_vec()),
            seed0: 0,
        }),
    })
}

/// Samples per radius of `tails` without a config.
pub const DEFAULT_TAIL_SAMPLES: usize = 4000;
/// Run lengths of `lamp` without a config.
pub const DEFAULT_LAMP_LENGTHS: [u32; 10] = [4, 5, 6, 8, 10, 12, 16, 20, 24, 32];

/// Loads a document from a path, for tests and scripts.
pub fn load_document(path: &Path) -> Result<Document, CliError> {
    config::load(path)
}
