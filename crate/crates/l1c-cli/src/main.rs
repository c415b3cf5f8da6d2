//! Batch experiment runner for the l1c solvers: reproduces the built-in
//! experiments at desk scale and emits CSV traces plus JSON summaries.

mod curvature;
mod output;
mod overrides;
mod scaling_cmd;
mod student_cmd;
mod toy_cmd;
mod validate_cmd;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "l1c",
    version,
    about = "Second-order solvers for l1-regularized nonconvex problems",
    after_help = "Exit codes: 0 when every certificate-seeking run certified a stationary point \
                  (and every diagnostic run finished cleanly), 3 when some run ended without a \
                  certificate, 1 on errors."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the built-in 3-d quartic instance: both solvers escape a
    /// first-order stationary point with negative curvature, plus
    /// first-phase convergence-rate traces.
    Toy(toy_cmd::ToyArgs),
    /// Student's t-regression over subsampled DCT measurements, averaged
    /// over seeded trials.
    #[command(name = "student-t")]
    StudentT(student_cmd::StudentTArgs),
    /// Iterations-versus-tolerance study on a fixed quadratic family.
    Scaling(scaling_cmd::ScalingArgs),
    /// Re-check the line-search ledger of an emitted trace CSV.
    #[command(name = "validate-trace")]
    ValidateTrace(validate_cmd::ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverSel {
    Hpgncm,
    Pgn2cm,
    Fpgncm,
    Fpgn2cm,
}

/// Flags shared by the run commands.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Restrict to one solver (default: the command's full set).
    #[arg(long, value_enum)]
    pub solver: Option<SolverSel>,
    /// First-order target.
    #[arg(long)]
    pub eps_g: Option<f64>,
    /// Second-order target (default sqrt(eps_g)).
    #[arg(long)]
    pub eps_h: Option<f64>,
    /// Base seed; L1C_SEED is consulted when the flag is absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// JSON file overriding solver-configuration fields by name.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl CommonArgs {
    /// Seed precedence: flag, then the L1C_SEED environment variable, then
    /// the command default.
    pub fn resolve_seed(&self, default: u64) -> anyhow::Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var("L1C_SEED") {
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .map_err(|e| anyhow::anyhow!("L1C_SEED {v:?} is not a valid seed: {e}")),
            Err(_) => Ok(default),
        }
    }

    /// Applies, in order: the command preset, the config file, then explicit
    /// flags. Seed precedence: `--seed`, `L1C_SEED`, config-file `rng_seed`,
    /// command default.
    pub fn build_config(
        &self,
        mut preset: l1c_core::SolverConfig,
        default_seed: u64,
    ) -> anyhow::Result<l1c_core::SolverConfig> {
        let mut file_seed = None;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
            let ov: overrides::ConfigOverrides = serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("parsing {}: {e}", path.display()))?;
            ov.apply(&mut preset);
            file_seed = ov.rng_seed;
        }
        if let Some(eps_g) = self.eps_g {
            preset.eps_g = eps_g;
            preset.eps_h = eps_g.sqrt();
        }
        if let Some(eps_h) = self.eps_h {
            preset.eps_h = eps_h;
        }
        if let Some(m) = self.max_iters {
            preset.max_iters = m;
        }
        preset.rng_seed = self.resolve_seed(file_seed.unwrap_or(default_seed))?;
        preset.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(preset)
    }

    pub fn wants(&self, solver: SolverSel) -> bool {
        self.solver.is_none_or(|s| s == solver)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Toy(args) => toy_cmd::run(args),
        Cmd::StudentT(args) => student_cmd::run(args),
        Cmd::Scaling(args) => scaling_cmd::run(args),
        Cmd::ValidateTrace(args) => validate_cmd::run(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
