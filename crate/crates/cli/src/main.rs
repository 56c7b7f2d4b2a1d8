use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gml_bvp_cli::{cmd_compare, cmd_oracle, cmd_solve, EXIT_INPUT};

/// Two-point boundary value problems by proximal relaxation.
#[derive(Parser)]
#[command(name = "gml-bvp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the relaxation solver on a config.
    Solve {
        config: PathBuf,
        /// Trajectory CSV (default: config `output.trajectory`, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON run report (default: config `output.report`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve the same problem by shooting on the same grid.
    Oracle {
        config: PathBuf,
        /// euler or rk4
        #[arg(long)]
        integrator: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare two trajectory CSVs column by column.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Largest accepted relative max-norm difference per column.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// JSON difference report (default: stdout).
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve {
            config,
            out,
            report,
        } => cmd_solve(config, out.as_deref(), report.as_deref()),
        Command::Oracle {
            config,
            integrator,
            out,
            report,
        } => cmd_oracle(
            config,
            integrator.as_deref(),
            out.as_deref(),
            report.as_deref(),
        ),
        Command::Compare { a, b, tol, report } => cmd_compare(a, b, *tol, report.as_deref()),
    };
    match result {
        Ok(status) => {
            eprintln!("{}", status.message);
            ExitCode::from(status.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
