use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "gaussprg", version, about = "Gaussian PRG for functions of PTFs: generation, fooling experiments, diagnostics")]
pub struct Cli {
    /// Indent JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON object of option values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derived parameters and exact seed length.
    Params(ParamArgs),
    /// Generator output vectors.
    Gen(GenArgs),
    /// Fooling gap between generator and Gaussian samples.
    Fool(FoolArgs),
    /// Diagnostic suites.
    #[command(subcommand)]
    Diag(Diag),
}

#[derive(Subcommand, Debug)]
pub enum Diag {
    /// Exhaustive joint uniformity of a small hash family.
    Independence(IndependenceArgs),
    /// Closeness of exact and grid-truncated Box–Muller draws.
    Coupling(CouplingArgs),
    /// Small-ball probability of random normalized polynomials.
    Anticonc(AntiConcArgs),
    /// Expansion, hypercontractivity, perturbation, growth and bump checks.
    Lemmas(LemmaArgs),
    /// Finite-difference derivative bounds of the bump functions.
    Mollifier(MollifierArgs),
}

/// Generator parameters. `k`, `d`, `eps`, `n` are required (from flags or config).
#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct ParamArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub override_r: Option<u32>,
    #[arg(long)]
    pub override_l: Option<u64>,
    #[arg(long)]
    pub override_m: Option<u32>,
    /// Source independence; anything but 2dR is an under-independence control.
    #[arg(long)]
    pub wiseness: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub c_prime: Option<f64>,
    #[arg(long)]
    pub c_double_prime: Option<f64>,
    #[arg(long)]
    pub bias_margin: Option<u32>,
    /// Desk-scale R, L, M (explicit overrides still win).
    #[arg(long)]
    #[serde(default)]
    pub desk: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct GenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Master seed, hex.
    #[arg(long)]
    pub seed_hex: Option<String>,
    /// Treat --seed-hex as the full generator seed instead of a master seed.
    #[arg(long)]
    #[serde(default)]
    pub raw_seed: bool,
    /// Number of vectors (draws 0..count of the master seed).
    #[arg(long)]
    pub count: Option<u64>,
    /// Binary file receiving all vectors as little-endian f64, row-major.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct FoolArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Master seed of the generator arm, hex.
    #[arg(long)]
    pub seed_hex: Option<String>,
    /// Seed of the Gaussian reference arm.
    #[arg(long)]
    pub reference_seed: Option<u64>,
    /// Samples per arm.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Gap tolerance added to the confidence half-widths.
    #[arg(long)]
    pub target: Option<f64>,
    /// Family JSON file.
    #[arg(long, conflicts_with_all = ["family_seed", "control"])]
    pub family: Option<PathBuf>,
    /// Seed of a random normalized family with the given k, d, n.
    #[arg(long)]
    pub family_seed: Option<u64>,
    /// Use AND(sign(x0 - x1), sign(x1 - x0)), which only repeated coordinates satisfy.
    #[arg(long, conflicts_with = "family_seed")]
    #[serde(default)]
    pub control: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct IndependenceArgs {
    /// Field modulus (prime).
    #[arg(long)]
    pub p: Option<u64>,
    /// Wiseness of the enumerated source.
    #[arg(long)]
    pub t: Option<usize>,
    /// Largest subset size tested (defaults to t).
    #[arg(long)]
    pub test_order: Option<usize>,
    /// Comma-separated evaluation points (defaults to 0..min(p, 16)).
    #[arg(long, value_delimiter = ',')]
    pub indices: Option<Vec<u64>>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct CouplingArgs {
    /// Grid precision in bits.
    #[arg(long = "m", visible_alias = "M")]
    pub m: Option<u32>,
    /// Closeness threshold (defaults to 2^-7 for every M).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct AntiConcArgs {
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct LemmaArgs {
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
pub struct MollifierArgs {
    /// Lowest derivative order checked against the t^(6t) envelope (up to 4).
    #[arg(long)]
    pub min_order: Option<u32>,
}
