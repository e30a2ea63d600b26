use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use yukawa_sphere_cli::commands::{self, Report, RunOptions};
use yukawa_sphere_cli::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "yukawa-sphere", version, about = "Yukawa-Beltrami Dirichlet solver on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve once and write density, target values and diagnostics.
    Solve(Common),
    /// Errors of both quadratures over an N sweep.
    Convergence(Common),
    /// Condition number and iterations over a k sweep.
    Ksweep(Common),
    /// Condition number and iterations over ellipse aspect ratios.
    Curvature(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output.dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute and write the full spectrum.
    #[arg(long)]
    eigenvalues: bool,
    /// Scatter targets randomly with this seed instead of the lattice.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> yukawa_sphere_cli::Result<Report> {
    let (args, f): (_, fn(&ExperimentConfig, &RunOptions) -> _) = match cli.command {
        Cmd::Solve(a) => (a, commands::cmd_solve),
        Cmd::Convergence(a) => (a, commands::cmd_convergence),
        Cmd::Ksweep(a) => (a, commands::cmd_ksweep),
        Cmd::Curvature(a) => (a, commands::cmd_curvature),
    };
    let cfg = ExperimentConfig::load(&args.config)?;
    let out = args
        .out
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions {
        out,
        eigenvalues: args.eigenvalues,
        seed: args.seed,
    };
    f(&cfg, &opts)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: at least one solve missed the GMRES tolerance");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
