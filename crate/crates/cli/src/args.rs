use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "rotwalk", version, about = "Random rotation walks on the circle: spectra, tails, CLT checks and certified constructions")]
pub struct Cli {
    /// Master seed for every simulation.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (a directory for `construct`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// One experiment: everything needed to reproduce an output file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Experiment {
    pub seed: u64,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Eigenvalues and KV / Poisson / sigma^2 partial sums.
    Spectrum(SpectrumArgs),
    /// Monte Carlo tail probability of S_n / n^s.
    Tail(TailArgs),
    /// Distribution of S_n / sqrt(n) against the predicted normal law.
    Clt(CltArgs),
    /// Exact tail by path enumeration, optionally against Monte Carlo.
    Exact(ExactArgs),
    /// Build a certified counterexample: ledger, angle and series files.
    Construct(ConstructArgs),
    /// Re-check every line of a ledger file.
    Verify(VerifyArgs),
    /// Finite rotation chain: spectrum, mixing check, Chebyshev horizon.
    Chain(ChainArgs),
    /// Canned experiments.
    Preset(PresetArgs),
    /// Re-run the configuration embedded in an output or config file.
    #[serde(skip)]
    Run(RunArgs),
}

/// Angle: `p/q`, `golden`, `cf:a0,a1,...`, `liouville:LEVELS` or angle JSON.
/// Series: `q:a,q:a,...` (amplitudes like `1/8`, `10^-2`), `@file.json`,
/// inline JSON, or `0` for the zero observable.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Observed {
    #[arg(long)]
    pub angle: String,
    #[arg(long)]
    pub series: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub observed: Observed,
    /// Keep frequencies up to this value.
    #[arg(long)]
    pub cutoff: Option<String>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct TailArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub observed: Observed,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Scaling exponent in (1/2, 1].
    #[arg(long, default_value = "3/5")]
    pub s: String,
    #[arg(long)]
    pub threshold: f64,
    /// Count |S_n| instead of S_n.
    #[arg(long)]
    pub two_sided: bool,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct CltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub observed: Observed,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Predicted standard deviation; defaults to the square root of the
    /// full sigma^2 sum.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ExactArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub observed: Observed,
    #[arg(long)]
    pub steps: u32,
    #[arg(long, default_value = "3/5")]
    pub s: String,
    #[arg(long)]
    pub threshold: f64,
    #[arg(long)]
    pub two_sided: bool,
    /// Midpoint count; defaults to a size that keeps the error below 1e-3.
    #[arg(long)]
    pub quadrature: Option<u64>,
    /// Also estimate by Monte Carlo with this many trials and compare.
    #[arg(long)]
    pub cross_check: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Theorem {
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Three,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    /// Scaling exponent; theorem 2 picks an admissible one when absent.
    #[arg(long)]
    pub s: Option<String>,
    /// Number of levels (theorems 1 and 2).
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Theorem 1 with geometric amplitudes instead of 2^-q.
    #[arg(long)]
    pub toy: bool,
    #[arg(long, default_value = "1/4")]
    pub toy_ratio: String,
    /// Angle for theorems 2 and 3.
    #[arg(long)]
    pub angle: Option<String>,
    #[arg(long, default_value = "6")]
    pub gamma: String,
    #[arg(long, default_value = "1")]
    pub c: String,
    /// Level cap for theorem 3.
    #[arg(long)]
    pub max_levels: Option<usize>,
    /// Fill the probabilistic slots by simulation.
    #[arg(long)]
    pub evidence: bool,
    #[arg(long, default_value_t = 4000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1 << 22)]
    pub max_steps: u64,
    /// Only fill slots whose name starts with this prefix.
    #[arg(long)]
    pub only: Option<String>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct VerifyArgs {
    pub ledger: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ChainArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long, default_value_t = 1)]
    pub p: i64,
    #[arg(long, default_value_t = 32)]
    pub horizon: u32,
    /// Series for the Chebyshev horizon.
    #[arg(long)]
    pub series: Option<String>,
    #[arg(long, default_value_t = 0.6)]
    pub s: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0 / 24.0)]
    pub eps: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct PresetArgs {
    /// One of: golden-c1, lemma1-faithful, lemma3.
    pub name: String,
    #[arg(long, default_value_t = 4000)]
    pub trials: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct RunArgs {
    pub config: PathBuf,
}
