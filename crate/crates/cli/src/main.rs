//! `fdkp`: batch front end for simulations, soliton checks and transverse
//! stability computations.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{CliError, CliResult};
use output::OutputDir;

#[derive(Parser)]
#[command(name = "fdkp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for sweeps and pencil solves.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Tabulate full and long-wave dispersion relations over the grid lattice.
    Dispersion,
    /// Evolve an initial state and record invariants and snapshots.
    Simulate,
    /// Residual of the travelling-wave equation for a solitary wave.
    SolitonCheck,
    /// Quadrature of the inner products used by the stability expansion.
    VerifyIntegrals,
    /// Leading eigenvalues of the transverse stability pencil.
    StabilityEigen,
    /// Growth rates measured from perturbed-soliton simulations.
    StabilityPerturb,
    /// Direct-simulation growth rates over a grid of speeds and wavenumbers.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Simulate => "simulate",
            Command::SolitonCheck => "soliton-check",
            Command::VerifyIntegrals => "verify-integrals",
            Command::StabilityEigen => "stability-eigen",
            Command::StabilityPerturb => "stability-perturb",
            Command::Sweep => "sweep",
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let loaded = config::load(path)?;
    let cfg = &loaded.config;
    let name = cli.command.name();
    let out = OutputDir::create(&commands::output_root(cfg, cli.out.as_deref(), name))?;
    let body = || match cli.command {
        Command::Dispersion => commands::dispersion(cfg, &out),
        Command::Simulate => commands::simulate(cfg, &out),
        Command::SolitonCheck => commands::soliton_check(cfg, &out),
        Command::VerifyIntegrals => commands::verify_integrals(cfg, &out),
        Command::StabilityEigen => commands::stability_eigen(cfg, &out),
        Command::StabilityPerturb => commands::stability_perturb(cfg, &out),
        Command::Sweep => commands::sweep(cfg, &out),
    };
    let result = match cli.jobs {
        Some(jobs) => fdkp_core::exec::with_jobs(jobs, body),
        None => body(),
    };
    // the manifest is written even when a check fails, so partial output is traceable
    out.finish(name, &loaded.raw)?;
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FDKP_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = e.record();
            eprintln!(
                "{}",
                serde_json::to_string(&record).unwrap_or_else(|_| e.to_string())
            );
            ExitCode::from(record.exit_code as u8)
        }
    }
}
