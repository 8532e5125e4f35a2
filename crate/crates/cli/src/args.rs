use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vqspec_core::{DerivativeMode, EngineConfig, Method, ResetMode};

#[derive(Debug, Parser)]
#[command(
    name = "vqspec",
    version,
    about = "Low-lying spectra of qubit Hamiltonians by variational imaginary-time evolution with deflation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover eigenstates one after another and write trajectories, eigenstates and a report.
    Solve(SolveArgs),
    /// Print the exact spectrum with degeneracies.
    Diag(DiagArgs),
    /// Generate a random 3SAT instance with exactly one satisfying assignment.
    Gen3sat(Gen3satArgs),
    /// Run the fast invariant suite.
    Verify(VerifyArgs),
    /// Compare imaginary-time evolution with gradient descent over many seeds.
    Compare(CompareArgs),
}

/// `VARS:CLAUSES:SEED` for the built-in 3SAT generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SatSpec {
    pub vars: usize,
    pub clauses: usize,
    pub seed: u64,
}

impl FromStr for SatSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [v, c, seed] = parts[..] else {
            return Err(format!("expected VARS:CLAUSES:SEED, got '{s}'"));
        };
        let num = |x: &str, what: &str| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| format!("invalid {what} '{x}' in '{s}'"))
        };
        Ok(SatSpec {
            vars: num(v, "variable count")? as usize,
            clauses: num(c, "clause count")? as usize,
            seed: num(seed, "seed")?,
        })
    }
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Pauli-sum Hamiltonian files; several files form a sweep with one run each.
    #[arg(long, value_name = "FILE", num_args = 1..)]
    pub pauli: Vec<PathBuf>,
    /// DIMACS CNF file, compiled to its 3SAT penalty Hamiltonian.
    #[arg(long, value_name = "FILE")]
    pub cnf: Option<PathBuf>,
    /// Built-in single-solution 3SAT instance.
    #[arg(long, value_name = "VARS:CLAUSES:SEED")]
    pub random3sat: Option<SatSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnsatzKind {
    Compact,
    Lowdepth,
    Custom,
}

#[derive(Debug, Clone, Args)]
pub struct AnsatzArgs {
    #[arg(long, value_enum, default_value_t = AnsatzKind::Compact)]
    pub ansatz: AnsatzKind,
    /// Rotations per qubit for the compact ansatz.
    #[arg(long, default_value_t = 7)]
    pub params_per_qubit: usize,
    /// Parameter count for the low-depth ansatz [default: 7 per qubit].
    #[arg(long)]
    pub params: Option<usize>,
    /// Gate list for `--ansatz custom`.
    #[arg(long, value_name = "FILE", required_if_eq("ansatz", "custom"))]
    pub ansatz_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Imaginary,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResetArg {
    Rerandomize,
    Reset,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Imaginary)]
    pub method: MethodArg,
    /// Imaginary-time step.
    #[arg(long, default_value_t = 0.1)]
    pub dtau: f64,
    /// Gradient-descent learning rate.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Finite-difference step for parameter derivatives.
    #[arg(long, default_value_t = 1e-5)]
    pub fd_step: f64,
    /// Analytic parameter derivatives instead of finite differences.
    #[arg(long)]
    pub analytic: bool,
    #[arg(long, default_value_t = 1e-4)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub lambda_max: f64,
    /// Deflation penalty strength.
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub conv_threshold: f64,
    #[arg(long, default_value_t = 3)]
    pub conv_window: usize,
    /// Step budget for the whole run.
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    #[arg(long, value_enum, default_value_t = ResetArg::Rerandomize)]
    pub reset_mode: ResetArg,
    /// Energy tolerance for grouping levels.
    #[arg(long, default_value_t = 5e-3)]
    pub degeneracy_tol: f64,
}

impl EngineArgs {
    pub fn config(&self, num_states: usize, seed: u64, oracle: bool) -> EngineConfig {
        EngineConfig {
            method: match self.method {
                MethodArg::Imaginary => Method::Imaginary,
                MethodArg::Gradient => Method::Gradient,
            },
            dtau: self.dtau,
            eta: self.eta,
            derivative: if self.analytic {
                DerivativeMode::Analytic
            } else {
                DerivativeMode::FiniteDifference { step: self.fd_step }
            },
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            alpha: self.alpha,
            conv_threshold: self.conv_threshold,
            conv_window: self.conv_window,
            max_iterations: self.max_iterations,
            num_states,
            seed,
            reset_mode: match self.reset_mode {
                ResetArg::Rerandomize => ResetMode::Rerandomize,
                ResetArg::Reset => ResetMode::Reset,
            },
            oracle,
            degeneracy_tol: self.degeneracy_tol,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub ansatz: AnsatzArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Number of eigenstates to discover.
    #[arg(long, default_value_t = 1)]
    pub states: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent runs per Hamiltonian, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Skip exact diagonalization in the report.
    #[arg(long)]
    pub no_oracle: bool,
    /// Previously recorded eigenstates to deflate from the start.
    #[arg(long, value_name = "FILE", num_args = 1..)]
    pub deflate: Vec<PathBuf>,
    /// Concurrent runs [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(
        long,
        value_name = "DIR",
        env = "VQSPEC_OUT_DIR",
        default_value = "vqspec-out"
    )]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DiagArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Energy tolerance for grouping levels.
    #[arg(long, default_value_t = 5e-3)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Gen3satArgs {
    pub vars: usize,
    pub clauses: usize,
    pub seed: u64,
    /// Write the CNF here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub max_attempts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Test hook: negate the McLachlan force in the monotonicity check.
    #[arg(long, hide = true)]
    pub inject_v_sign_flip: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub ansatz: AnsatzArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Number of seeds, starting at `--seed`.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Residual above which a final state counts as not an eigenstate.
    #[arg(long, default_value_t = 5e-2)]
    pub eigen_tol: f64,
    #[arg(
        long,
        value_name = "DIR",
        env = "VQSPEC_OUT_DIR",
        default_value = "vqspec-out"
    )]
    pub out: PathBuf,
}
