use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsl_cli::commands::{audit_command, fisher_command, run_command, sweep_command};
use qsl_cli::CliError;

#[derive(Parser)]
#[command(name = "qsl", version, about = "Quantum speed limit runs and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a protocol and write the full JSON report.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Repeat a run over values of one numeric config field.
    Sweep {
        config: PathBuf,
        /// Dot path of the field, e.g. `params.gamma`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run the inequality audit only.
    Audit {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Fisher information of a translated Gaussian.
    Fisher {
        #[arg(long)]
        sigma: f64,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            output,
            timing,
            tol,
        } => run_command(&config, output.as_deref(), timing, tol).map(drop),
        Command::Sweep {
            config,
            param,
            values,
            output,
            tol,
        } => sweep_command(&config, &param, &values, &output, tol).map(drop),
        Command::Audit {
            config,
            output,
            tol,
        } => audit_command(&config, output.as_deref(), tol).map(drop),
        Command::Fisher {
            sigma,
            output,
            points,
        } => fisher_command(sigma, points, &output).map(drop),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
