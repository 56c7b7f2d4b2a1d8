use std::path::{Path, PathBuf};
use std::time::Instant;

use gml_bvp::shooting::{solve_shooting, RootMethod};
use gml_bvp::{solve, Integrator, OdeSystem, SolveReport};
use serde::Serialize;

use crate::config::{Resolved, RunConfig};
use crate::table::Table;
use crate::{CliError, EXIT_NUMERICAL, EXIT_OK};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Status {
    pub code: i32,
    pub message: String,
}

#[derive(Debug, Serialize)]
struct SolveJson<'a> {
    command: &'static str,
    n_nodes: usize,
    relax_k: f64,
    outer_tol: f64,
    converged: bool,
    outer_iterations: usize,
    newton_failures: usize,
    final_euler_residual: f64,
    max_identity_violation: f64,
    elapsed_seconds: f64,
    final_state: &'a [f64],
    residual_history: &'a [f64],
    endpoint_discrepancy: &'a [f64],
    identity_violation: &'a [f64],
}

#[derive(Debug, Serialize)]
struct OracleJson<'a> {
    command: &'static str,
    integrator: String,
    method: &'static str,
    converged: bool,
    iterations: usize,
    free_start: &'a [f64],
    mismatch_norm: f64,
    initial_state: &'a [f64],
    final_state: &'a [f64],
}

#[derive(Debug, Serialize)]
struct FailureJson {
    command: &'static str,
    converged: bool,
    error: String,
}

/// Runs the relaxation solver. The trajectory goes to `out` (or the
/// config's path, or stdout) and the JSON report to `report` (or the
/// config's path) when one is given.
pub fn cmd_solve(
    config: &Path,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Result<Status, CliError> {
    let resolved = RunConfig::from_path(config)?.resolve()?;
    let (out, report) = output_paths(&resolved, out, report);
    let problem = &resolved.problem;

    let started = Instant::now();
    let (traj, rep) = match solve(problem, &resolved.params, &resolved.free_start_defaults) {
        Ok(v) => v,
        Err(e) => return numerical_failure("solve", e.into(), report.as_deref()),
    };
    let elapsed = started.elapsed().as_secs_f64();

    write_table(
        &Table::from_trajectory(&traj, &problem.system().component_names()),
        out.as_deref(),
    )?;
    if let Some(path) = report.as_deref() {
        write_json(
            path,
            &solve_json(&resolved, &rep, traj.row(traj.len() - 1), elapsed),
        )?;
    }
    Ok(if rep.converged {
        Status {
            code: EXIT_OK,
            message: format!(
                "converged in {} outer iterations, Euler residual {:.3e}",
                rep.outer_iterations, rep.final_euler_residual
            ),
        }
    } else {
        Status {
            code: EXIT_NUMERICAL,
            message: format!(
                "not converged after {} outer iterations (last update {:.3e}); best iterate written",
                rep.outer_iterations,
                rep.residual_history.last().copied().unwrap_or(f64::NAN)
            ),
        }
    })
}

fn solve_json<'a>(
    resolved: &Resolved,
    rep: &'a SolveReport,
    final_state: &'a [f64],
    elapsed: f64,
) -> SolveJson<'a> {
    SolveJson {
        command: "solve",
        n_nodes: resolved.problem.grid().n_nodes(),
        relax_k: resolved.params.relax_k,
        outer_tol: resolved.params.outer_tol,
        converged: rep.converged,
        outer_iterations: rep.outer_iterations,
        newton_failures: rep.newton_failures,
        final_euler_residual: rep.final_euler_residual,
        max_identity_violation: rep.identity_violation.iter().copied().fold(0.0, f64::max),
        elapsed_seconds: elapsed,
        final_state,
        residual_history: &rep.residual_history,
        endpoint_discrepancy: &rep.endpoint_discrepancy,
        identity_violation: &rep.identity_violation,
    }
}

/// Runs the shooting oracle on the solver's grid.
pub fn cmd_oracle(
    config: &Path,
    integrator: Option<&str>,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Result<Status, CliError> {
    let integrator = integrator
        .map(|s| s.parse::<Integrator>().map_err(CliError::Config))
        .transpose()?;
    let resolved = RunConfig::from_path(config)?.resolve()?;
    let shooting = resolved.shooting_config(integrator)?;
    let (out, report) = output_paths(&resolved, out, report);
    let problem = &resolved.problem;

    let (traj, rep) = match solve_shooting(problem, &shooting) {
        Ok(v) => v,
        Err(e) => return numerical_failure("oracle", e.into(), report.as_deref()),
    };
    write_table(
        &Table::from_trajectory(&traj, &problem.system().component_names()),
        out.as_deref(),
    )?;
    if let Some(path) = report.as_deref() {
        let json = OracleJson {
            command: "oracle",
            integrator: shooting.integrator.to_string(),
            method: match rep.method {
                RootMethod::None => "none",
                RootMethod::Bisection => "bisection",
                RootMethod::Newton => "newton",
            },
            converged: rep.converged,
            iterations: rep.iterations,
            free_start: &rep.free_start,
            mismatch_norm: rep.mismatch_norm,
            initial_state: traj.row(0),
            final_state: traj.row(traj.len() - 1),
        };
        write_json(path, &json)?;
    }
    let code = if rep.converged {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    };
    Ok(Status {
        code,
        message: format!(
            "{} shooting: free start {:?}, terminal mismatch {:.3e}{}",
            shooting.integrator,
            rep.free_start,
            rep.mismatch_norm,
            if rep.converged {
                ""
            } else {
                " (not converged)"
            }
        ),
    })
}

/// Per-column differences between two trajectory files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub tol: f64,
    pub rows: usize,
    pub columns: Vec<ColumnDiff>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnDiff {
    pub name: String,
    pub max_abs: f64,
    /// `max_abs` divided by the larger max-norm of the two columns.
    pub max_rel: f64,
}

/// Compares two trajectory files on the same grid.
pub fn compare_tables(a: &Table, b: &Table, tol: f64) -> Result<CompareReport, CliError> {
    if a.header != b.header {
        return Err(CliError::Table(format!(
            "column mismatch: [{}] vs [{}]",
            a.header.join(","),
            b.header.join(",")
        )));
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::Table(format!(
            "grid mismatch: {} vs {} rows",
            a.rows.len(),
            b.rows.len()
        )));
    }
    for (i, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        if ra.len() != a.header.len() || rb.len() != b.header.len() {
            return Err(CliError::Table(format!(
                "data row {} has the wrong width",
                i + 1
            )));
        }
        if (ra[0] - rb[0]).abs() > 1e-9 * ra[0].abs().max(1.0) {
            return Err(CliError::Table(format!(
                "grid mismatch at data row {}: t = {} vs {}",
                i + 1,
                ra[0],
                rb[0]
            )));
        }
    }
    let columns: Vec<ColumnDiff> = (1..a.header.len())
        .map(|c| {
            let (mut max_abs, mut scale) = (0.0_f64, 0.0_f64);
            for (x, y) in a.column(c).zip(b.column(c)) {
                let diff = (x - y).abs();
                max_abs = if diff.is_nan() {
                    f64::NAN
                } else {
                    max_abs.max(diff)
                };
                scale = scale.max(x.abs()).max(y.abs());
            }
            let max_rel = if max_abs == 0.0 { 0.0 } else { max_abs / scale };
            ColumnDiff {
                name: a.header[c].clone(),
                max_abs,
                max_rel,
            }
        })
        .collect();
    let within_tolerance = columns.iter().all(|c| c.max_rel <= tol);
    Ok(CompareReport {
        tol,
        rows: a.rows.len(),
        columns,
        within_tolerance,
    })
}

/// Compares two trajectory CSVs; the JSON report goes to `report` or stdout.
pub fn cmd_compare(
    a: &Path,
    b: &Path,
    tol: f64,
    report: Option<&Path>,
) -> Result<Status, CliError> {
    if tol.is_nan() || tol < 0.0 {
        return Err(CliError::Config(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let rep = compare_tables(&Table::read_path(a)?, &Table::read_path(b)?, tol)?;
    match report {
        Some(path) => write_json(path, &rep)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&rep).expect("serializable")
        ),
    }
    let worst = rep
        .columns
        .iter()
        .max_by(|x, y| x.max_rel.total_cmp(&y.max_rel));
    let summary = match worst {
        Some(c) => format!(
            "largest relative difference {:.3e} in `{}`",
            c.max_rel, c.name
        ),
        None => "no data columns".to_owned(),
    };
    Ok(Status {
        code: if rep.within_tolerance {
            EXIT_OK
        } else {
            EXIT_NUMERICAL
        },
        message: summary,
    })
}

fn output_paths(
    resolved: &Resolved,
    out: Option<&Path>,
    report: Option<&Path>,
) -> (Option<PathBuf>, Option<PathBuf>) {
    (
        out.map(Path::to_owned)
            .or_else(|| resolved.output.trajectory.clone()),
        report
            .map(Path::to_owned)
            .or_else(|| resolved.output.report.clone()),
    )
}

fn write_table(table: &Table, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => table.write_path(p),
        None => table.write(std::io::stdout().lock()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Numerical failures still leave a report behind when one was requested.
fn numerical_failure(
    command: &'static str,
    err: CliError,
    report: Option<&Path>,
) -> Result<Status, CliError> {
    if err.exit_code() != EXIT_NUMERICAL {
        return Err(err);
    }
    if let Some(path) = report {
        write_json(
            path,
            &FailureJson {
                command,
                converged: false,
                error: err.to_string(),
            },
        )?;
    }
    Err(err)
}
