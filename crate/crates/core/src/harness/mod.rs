//! Command-line harness: planning, sample-verify-retry construction,
//! verification, sparsification, recovery benchmarks and bound tables.
//! Every command is a pure function of its configuration and seed.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::{Model, DEFAULT_C_PART};
use crate::sketch::PlanConstants;

mod commands;
mod io;

pub use commands::{cmd_bench, cmd_bounds, cmd_build, cmd_plan, cmd_recover, cmd_sparsify, cmd_verify};
pub use io::{format_vector, parse_vector};

pub const DEFAULT_CAP: u64 = 10_000_000;
pub const DEFAULT_RETRIES: u32 = 20;
pub const DEFAULT_TRIALS: u64 = 100;
pub const DEFAULT_SAMPLES: u64 = 100;

#[derive(Parser, Debug)]
#[command(name = "modelrip", version, about = "Model-based RIP-1 matrices: plan, build, verify, sparsify, recover")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print planned degree and row count as CSV.
    Plan(CommonArgs),
    /// Sample a graph, verify expansion, retry with new seeds; write files.
    Build(CommonArgs),
    /// Check a graph file for expansion or a matrix file for RIP-1.
    Verify(VerifyArgs),
    /// Thin a matrix column-wise and keep the well-behaved columns.
    Sparsify(MatrixArgs),
    /// Recover one signal by exhaustive model l1 regression.
    Recover(RecoverArgs),
    /// Recovery trials on random model-sparse (plus noise) signals.
    Bench(BenchArgs),
    /// Evaluate bound formulas as CSV.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// TOML file with any of the options below; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `general`, `block`, `tree`, or a full form such as `block:n=64,k=8,b=4`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Output directory (build, sparsify) or file (other commands).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Work cap for exhaustive oracles.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub retries: Option<u32>,
    /// `auto`, `exact` or `monte-carlo`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Random members drawn in monte-carlo mode.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long = "c-d")]
    pub c_d: Option<f64>,
    #[arg(long = "c-m")]
    pub c_m: Option<f64>,
    #[arg(long = "c-part")]
    pub c_part: Option<f64>,
    /// Noise l1 mass as a fraction of the sparse part (bench).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Row count overriding the plan (build).
    #[arg(long)]
    pub m: Option<usize>,
    /// Left degree overriding the plan (build).
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, conflicts_with = "matrix")]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Check RIP-1 over unions of two members instead of members.
    #[arg(long)]
    pub doubled: bool,
    /// `text` or `csv` for matrix reports.
    #[arg(long, default_value = "text")]
    pub format: String,
}

#[derive(Args, Debug, Clone)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub matrix: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub matrix: PathBuf,
    /// True signal `x`; measurements are `Ax` and the result is scored.
    #[arg(long, conflicts_with = "measurements")]
    pub signal: Option<PathBuf>,
    /// Measurements `y`.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub matrix: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// A single bound kind; without it, a table for the model is printed.
    #[arg(long)]
    pub kind: Option<String>,
    /// `name=value`, repeatable.
    #[arg(long = "param")]
    pub params: Vec<String>,
    #[arg(long)]
    pub constant: Option<f64>,
}

/// Options accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    n: Option<usize>,
    k: Option<usize>,
    b: Option<usize>,
    eps: Option<f64>,
    seed: Option<u64>,
    trials: Option<u64>,
    out: Option<PathBuf>,
    cap: Option<u64>,
    retries: Option<u32>,
    mode: Option<String>,
    samples: Option<u64>,
    c_d: Option<f64>,
    c_m: Option<f64>,
    c_part: Option<f64>,
    noise: Option<f64>,
    m: Option<usize>,
    d: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    /// Exact when within the cap, otherwise monte-carlo.
    Auto,
    Exact,
    MonteCarlo,
}

/// Fully resolved options.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: Option<Model>,
    pub eps: Option<f64>,
    pub seed: u64,
    pub trials: u64,
    pub retries: u32,
    pub cap: u64,
    pub out: Option<PathBuf>,
    pub mode: ModeChoice,
    pub samples: u64,
    pub consts: PlanConstants,
    pub noise: f64,
    pub m: Option<usize>,
    pub d: Option<usize>,
}

impl ExperimentConfig {
    pub fn model(&self) -> Result<&Model> {
        self.model.as_ref().ok_or_else(|| Error::input("a model is required (--model with --n, --k, --b)"))
    }

    pub fn eps(&self) -> Result<f64> {
        self.eps.ok_or_else(|| Error::input("--eps is required"))
    }
}

impl CommonArgs {
    /// Merges flags over the config file over defaults.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let file: FileConfig = match &self.config {
            Some(p) => toml::from_str(&read_text(p)?).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
            None => FileConfig::default(),
        };
        let model_text = self.model.clone().or(file.model);
        let n = self.n.or(file.n);
        let k = self.k.or(file.k);
        let b = self.b.or(file.b);
        let model = match model_text {
            None => None,
            Some(t) if t.contains(':') => Some(t.parse::<Model>()?),
            Some(kind) => {
                let n = n.ok_or_else(|| Error::input("--n is required with --model"))?;
                let k = k.ok_or_else(|| Error::input("--k is required with --model"))?;
                Some(match kind.as_str() {
                    "general" => Model::general(n, k)?,
                    "block" => Model::block(n, k, b.ok_or_else(|| Error::input("--b is required for block models"))?)?,
                    "tree" => Model::tree(n, k)?,
                    other => return Err(Error::input(format!("unknown model kind {other:?}"))),
                })
            }
        };
        let mode = match self.mode.clone().or(file.mode).as_deref() {
            None | Some("auto") => ModeChoice::Auto,
            Some("exact") => ModeChoice::Exact,
            Some("monte-carlo") => ModeChoice::MonteCarlo,
            Some(other) => return Err(Error::input(format!("unknown mode {other:?}"))),
        };
        let eps = self.eps.or(file.eps);
        if let Some(e) = eps {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::input(format!("--eps must lie in (0, 1), got {e}")));
            }
        }
        let noise = self.noise.or(file.noise).unwrap_or(0.0);
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::input(format!("--noise must be a nonnegative real, got {noise}")));
        }
        let defaults = PlanConstants::default();
        Ok(ExperimentConfig {
            model,
            eps,
            seed: self.seed.or(file.seed).unwrap_or(0),
            trials: self.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            retries: self.retries.or(file.retries).unwrap_or(DEFAULT_RETRIES),
            cap: self.cap.or(file.cap).unwrap_or(DEFAULT_CAP),
            out: self.out.clone().or(file.out),
            mode,
            samples: self.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            consts: PlanConstants {
                c_d: self.c_d.or(file.c_d).unwrap_or(defaults.c_d),
                c_m: self.c_m.or(file.c_m).unwrap_or(defaults.c_m),
                c_part: self.c_part.or(file.c_part).unwrap_or(DEFAULT_C_PART),
            },
            noise,
            m: self.m.or(file.m),
            d: self.d.or(file.d),
        })
    }
}

pub(crate) fn read_text(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))
}

/// Runs a parsed command line and returns what goes to stdout.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Plan(c) => cmd_plan(&c.resolve()?),
        Command::Build(c) => cmd_build(&c.resolve()?),
        Command::Verify(v) => cmd_verify(&v.common.resolve()?, v),
        Command::Sparsify(s) => cmd_sparsify(&s.common.resolve()?, &s.matrix),
        Command::Recover(r) => cmd_recover(&r.common.resolve()?, r),
        Command::Bench(bn) => cmd_bench(&bn.common.resolve()?, &bn.matrix),
        Command::Bounds(bd) => cmd_bounds(&bd.common.resolve()?, bd),
    }
}
