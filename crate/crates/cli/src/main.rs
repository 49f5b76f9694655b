//! `nisqbound`: depth ceilings, variational lower bounds, classical baselines
//! and exact verification suites for noisy quantum optimizers.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod figure;
mod report;

#[derive(Debug, Parser)]
#[command(name = "nisqbound", version, about = "Limits on noisy quantum optimizers, checked against exact oracles")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write CSV data (curves, samples) here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Worker threads for enumeration, chains and verification.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an Ising instance as JSON.
    Gen(GenArgs),
    /// Depth ceilings and entropy budgets for depolarized circuits.
    DepthBound(DepthBoundArgs),
    /// Variational lower bound on the energy of noisy outputs and crossing depth.
    LowerBound(LowerBoundArgs),
    /// Glauber (heat-bath) Gibbs sampling with a rapid-mixing certificate.
    GibbsSample(GibbsArgs),
    /// Classical optimization baselines.
    Baseline(BaselineArgs),
    /// Entropy bounds for noisy annealers.
    AnnealBound(AnnealArgs),
    /// Run an exact verification suite.
    Verify(VerifyArgs),
    /// Emit figure data as CSV.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InstanceType {
    Regular,
    Sk,
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long = "type", value_enum)]
    pub kind: InstanceType,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Degree of regular graphs.
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Coupling of every regular-graph edge; -1 is antiferromagnetic (MAXCUT).
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub sign: f64,
    /// Edge probability of random instances.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
    #[arg(long, default_value_t = 1.0)]
    pub coupling_std: f64,
    #[arg(long, default_value_t = 0.0)]
    pub field_std: f64,
}

/// Depolarizing rates of single- and two-qubit layers and measurements.
#[derive(Debug, Clone, Copy, Args)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 1.6e-3)]
    pub p1: f64,
    #[arg(long, default_value_t = 6.2e-3)]
    pub p2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub pm: f64,
    /// Fraction of single-qubit layers.
    #[arg(long, default_value_t = 0.5)]
    pub f1: f64,
    /// Fraction of two-qubit layers.
    #[arg(long, default_value_t = 0.5)]
    pub f2: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Form {
    /// Linearized rates `f1 p1 + f2 p2`.
    Approx,
    /// Rates `-f1 ln(1 - p1) - f2 ln(1 - p2)`.
    Exact,
}

#[derive(Debug, Args)]
pub struct DepthBoundArgs {
    /// Relative energy precision.
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// `ln(||A|| n / ||H_I||)`; computed from --instance when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub log_term: Option<f64>,
    /// Ising instance used for the log term.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Form::Approx)]
    pub form: Form,
    /// Also report the entropy budget after this many layers (needs --n).
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Apply the measurement factor `(1 - pm)^2` to the budget.
    #[arg(long)]
    pub include_measurement: bool,
    /// `||H||` for the equivalent Gibbs inverse temperature of the budget.
    #[arg(long)]
    pub h_norm: Option<f64>,
    /// Contraction per layer for the trace-distance mixing depth (needs --initial-bits).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub initial_bits: Option<f64>,
    /// Lattice dimension for the local-Hamiltonian ceiling.
    #[arg(long)]
    pub lattice_dim: Option<u32>,
    #[arg(long, default_value_t = 2)]
    pub locality: u32,
    #[arg(long, default_value_t = 1.0)]
    pub strength: f64,
    /// Depolarizing rate used for the lattice ceiling.
    #[arg(long)]
    pub p: Option<f64>,
    /// Correlation length of the target ground state (needs --lattice-dim).
    #[arg(long)]
    pub xi: Option<f64>,
    /// Graph degree for QAOA round and noise thresholds (needs --n).
    #[arg(long)]
    pub qaoa_degree: Option<usize>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 1e2)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 400)]
    pub beta_points: usize,
}

#[derive(Debug, Args)]
pub struct LowerBoundArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Relative entropy budget in bits.
    #[arg(long, conflicts_with = "depth")]
    pub budget: Option<f64>,
    /// Circuit depth; the budget follows from the noise flags.
    #[arg(long)]
    pub depth: Option<f64>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long)]
    pub include_measurement: bool,
    /// Bias of the product reference state `e^{gamma Z}/(2 cosh gamma)` per qubit.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Classical energy for the crossing depth.
    #[arg(long, allow_hyphen_values = true)]
    pub ec: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct GibbsArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Recorded sweeps per chain.
    #[arg(long, default_value_t = 1000)]
    pub sweeps: u64,
    /// Burn-in sweeps; required outside the certified regime.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Sa,
    Sdp,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub beta_start: f64,
    #[arg(long, default_value_t = 3.0)]
    pub beta_end: f64,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: u64,
    /// Refuse annealing schedules that end outside the rapid-mixing regime.
    #[arg(long)]
    pub certified_only: bool,
    /// Relaxation rank; defaults to `ceil(sqrt(2n))`.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: u64,
    #[arg(long, default_value_t = 1000)]
    pub draws: u64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct RateArgs {
    /// Amplitude damping rate.
    #[arg(long)]
    pub r1: f64,
    /// Dephasing rate.
    #[arg(long, default_value_t = 0.0)]
    pub r2: f64,
    /// Control-noise rate.
    #[arg(long)]
    pub r3: f64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct TimeGrid {
    #[arg(long, default_value_t = 1.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 200)]
    pub t_points: usize,
}

#[derive(Debug, Args)]
pub struct AnnealArgs {
    #[command(flatten)]
    pub rates: RateArgs,
    #[arg(long)]
    pub n: usize,
    /// Mean transverse field.
    #[arg(long, default_value_t = 1.0)]
    pub gbar: f64,
    /// Anneal time for the linear-path bound.
    #[arg(long)]
    pub time: Option<f64>,
    /// Schedule JSON for the quadrature bound.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Quadrature spacing; defaults to `T / 2000`.
    #[arg(long)]
    pub step: Option<f64>,
    /// Energy precision for the classical-realm threshold.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, requires = "eps")]
    pub a_norm: Option<f64>,
    #[arg(long, requires = "eps")]
    pub h_norm: Option<f64>,
    #[command(flatten)]
    pub times: TimeGrid,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: nisqbound_oracle::suites::Suite,
    /// Register size (largest size for suites that draw it).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of seeded cases.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// Seed of the first case; cases use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[command(subcommand)]
    pub kind: FigureKind,
}

#[derive(Debug, Subcommand)]
pub enum FigureKind {
    /// Per-qubit entropy budget of a noisy linear-path annealer against the
    /// polynomial-time threshold.
    Annealer(FigureAnnealerArgs),
    /// Variational lower bound against entropy density with SA and SDP energies.
    Variational(FigureVariationalArgs),
}

#[derive(Debug, Args)]
pub struct FigureAnnealerArgs {
    #[arg(long, default_value_t = 0.02)]
    pub r3: f64,
    /// `r1 / r3`.
    #[arg(long, default_value_t = 1e-4)]
    pub ratio: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gbar: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// `||A|| n / ||H_I||`.
    #[arg(long, default_value_t = 1.0)]
    pub norm_ratio: f64,
    #[command(flatten)]
    pub times: TimeGrid,
}

#[derive(Debug, Args)]
pub struct FigureVariationalArgs {
    /// Instance to use; otherwise a regular antiferromagnet is generated.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long)]
    pub seed: u64,
    /// Entropy-density rows in the CSV.
    #[arg(long, default_value_t = 51)]
    pub points: usize,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: u64,
    #[arg(long, default_value_t = 100)]
    pub restarts: u64,
    #[arg(long, default_value_t = 1000)]
    pub draws: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, echo) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("nisqbound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
