use std::process::ExitCode;

use clap::{Parser, Subcommand};
use truncfrac_cli::{parse_config, run, Experiment, Settings, Status};

#[derive(Parser)]
#[command(name = "truncfrac", version, about = "Experiments with the truncated fractional operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve −Λ₁u = 1 with zero exterior data
    Elliptic(Settings),
    /// Evolve affine data plus a bump until it reaches its steady state
    Parabolic(Settings),
    /// Principal eigenpair by inverse power iteration
    Eigen(Settings),
    /// Sample the ball barrier and the radial barrier integral
    Barrier(Settings),
    /// Hölder seminorm and boundary barrier under grid refinement
    Regularity(Settings),
    /// Fit the decay rate of a negative bump against μ₁
    Decay(Settings),
    /// Lower bound at the center against the segment eigenvalue
    Lowerbound(Settings),
    /// s-convex envelope of clipped quadratic data
    Envelope(Settings),
}

impl Command {
    fn split(self) -> (Experiment, Settings) {
        match self {
            Command::Elliptic(s) => (Experiment::Elliptic, s),
            Command::Parabolic(s) => (Experiment::Parabolic, s),
            Command::Eigen(s) => (Experiment::Eigen, s),
            Command::Barrier(s) => (Experiment::Barrier, s),
            Command::Regularity(s) => (Experiment::Regularity, s),
            Command::Decay(s) => (Experiment::Decay, s),
            Command::Lowerbound(s) => (Experiment::Lowerbound, s),
            Command::Envelope(s) => (Experiment::Envelope, s),
        }
    }
}

fn main() -> ExitCode {
    let (experiment, settings) = Cli::parse().command.split();
    let config = match parse_config(experiment, settings) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = config.out.clone();
    match run(config) {
        Ok(report) => {
            match report.status {
                Status::Ok => println!("{}: ok, report in {}", report.experiment, dir.join("report.json").display()),
                Status::Violation => {
                    for v in &report.violations {
                        eprintln!("violation: {v}");
                    }
                }
                Status::Error => eprintln!("error: {}", report.error.as_deref().unwrap_or_default()),
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
