//! Library side of the `gml-bvp` command-line tool.
//!
//! Exit codes: 0 on success, 1 on bad input (missing file, malformed config,
//! inconsistent CSVs), 2 when the numerics fail (no convergence, divergence,
//! oracle without a root, comparison out of tolerance).

pub mod commands;
pub mod config;
pub mod table;

use std::path::PathBuf;

pub use commands::{cmd_compare, cmd_oracle, cmd_solve, CompareReport, Status};
pub use config::{Resolved, RunConfig};
pub use table::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid table: {0}")]
    Table(String),
    #[error(transparent)]
    Solver(#[from] gml_bvp::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gml_bvp::Error as E;
        match self {
            CliError::Io { .. } | CliError::Config(_) | CliError::Table(_) => EXIT_INPUT,
            CliError::Solver(
                E::InvalidGrid { .. }
                | E::Boundary(_)
                | E::InvalidParams(_)
                | E::DimensionMismatch { .. }
                | E::RowCount { .. }
                | E::ShootingSetup { .. },
            ) => EXIT_INPUT,
            CliError::Solver(_) => EXIT_NUMERICAL,
        }
    }
}
