//! Proximal relaxation solver for two-point boundary value problems.
//!
//! Given a previous iterate `ũ`, each outer iteration solves the relaxed
//! equation `K u' - (K - 1) ũ' = f(u)` on the grid:
//!
//! 1. the telescoped relation between the two end nodes is solved by Newton
//!    for the components that are not pinned (free start values and unknown
//!    end values);
//! 2. starting from the resulting end state, every earlier node is recovered
//!    by one implicit step
//!    `u_k - u_{k-1} = f(u_{k-1}) d/K + (K-1)/K (ũ_k - ũ_{k-1})`;
//! 3. `ũ` is replaced by `u` (optionally through Anderson mixing) until the
//!    relative update falls below `outer_tol`.
//!
//! A fixed point `u = ũ` satisfies `u_k - u_{k-1} = f(u_{k-1}) d`, the
//! explicit Euler recursion, together with the boundary conditions.

use std::collections::BTreeMap;

use crate::anderson::Anderson;
use crate::error::{Error, Result};
use crate::newton::{newton_solve_system, Matrix, NewtonOptions, NewtonResult, NonlinearSystem};
use crate::types::{
    BvpProblem, EndpointClosure, OdeSystem, RelaxationParams, SolveReport, Trajectory,
};

/// Unknowns of the endpoint system, each in ascending component order.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointUnknowns {
    /// Components free at `t = 0`.
    pub free_start_values: Vec<f64>,
    /// Components not pinned at `t = t_final`.
    pub unknown_end_values: Vec<f64>,
}

impl EndpointUnknowns {
    /// Reads the unknowns off the end nodes of a trajectory.
    pub fn from_trajectory<S: OdeSystem>(problem: &BvpProblem<S>, traj: &Trajectory) -> Self {
        let bc = problem.bc();
        let first = traj.row(0);
        let last = traj.row(traj.len() - 1);
        Self {
            free_start_values: bc.free_at_start().into_iter().map(|j| first[j]).collect(),
            unknown_end_values: bc.unknown_at_end().into_iter().map(|j| last[j]).collect(),
        }
    }

    fn to_vec(&self) -> Vec<f64> {
        let mut v = self.free_start_values.clone();
        v.extend_from_slice(&self.unknown_end_values);
        v
    }

    fn split(x: &[f64], n_free: usize) -> (&[f64], &[f64]) {
        x.split_at(n_free)
    }
}

fn newton_options(params: &RelaxationParams) -> NewtonOptions {
    NewtonOptions {
        tol: params.newton_tol,
        max_iter: params.newton_max_iter,
        min_iter: 1,
        ..NewtonOptions::default()
    }
}

fn check_on_grid<S: OdeSystem>(problem: &BvpProblem<S>, traj: &Trajectory) -> Result<()> {
    if traj.grid() != problem.grid() {
        return Err(Error::InvalidParams(
            "trajectory is not on the problem grid".into(),
        ));
    }
    if traj.dimension() != problem.dimension() {
        return Err(Error::DimensionMismatch {
            expected: problem.dimension(),
            found: traj.dimension(),
        });
    }
    Ok(())
}

/// Starting trajectory: components pinned at both ends are interpolated
/// linearly, components pinned at one end are held constant at that value,
/// and components free at the start are held at `free_start_defaults[j]`
/// (0 when absent). Keys are 0-based component indices.
pub fn initial_guess<S: OdeSystem>(
    problem: &BvpProblem<S>,
    free_start_defaults: &BTreeMap<usize, f64>,
) -> Trajectory {
    let grid = *problem.grid();
    let bc = problem.bc();
    let n = problem.dimension();
    let mut traj = Trajectory::zeros(grid, n);
    let n_nodes = grid.n_nodes();
    for j in 0..n {
        let start = bc.fixed_at_start.get(&j).copied();
        let end = bc.fixed_at_end.get(&j).copied();
        for k in 0..=n_nodes {
            let s = k as f64 / n_nodes as f64;
            traj.row_mut(k)[j] = match (start, end) {
                (Some(a), Some(b)) => a + (b - a) * s,
                (Some(a), None) => a,
                (None, Some(b)) => free_start_defaults.get(&j).copied().unwrap_or(b),
                (None, None) => free_start_defaults.get(&j).copied().unwrap_or(0.0),
            };
        }
    }
    traj
}

/// Evaluates `f` at every node of `traj`, row-major.
fn rhs_on_nodes<S: OdeSystem>(problem: &BvpProblem<S>, traj: &Trajectory) -> Result<Vec<f64>> {
    let n = problem.dimension();
    let mut out = vec![0.0; traj.len() * n];
    for (k, (u, du)) in traj.rows().zip(out.chunks_exact_mut(n)).enumerate() {
        problem.rhs_at(k, u, du)?;
    }
    Ok(out)
}

/// Accumulated error terms `E_k`, `k = 0..=N`, from nodal rhs values via
/// `E_k = E_{k-1} + k (f_{k-1} - f_k) d/K` with `E_0 = 0`.
fn error_terms_from_rhs(f_nodes: &[f64], n: usize, d_over_k: f64) -> Vec<f64> {
    let rows = f_nodes.len() / n;
    let mut e = vec![0.0; f_nodes.len()];
    for k in 1..rows {
        for j in 0..n {
            e[k * n + j] = e[(k - 1) * n + j]
                + k as f64 * (f_nodes[(k - 1) * n + j] - f_nodes[k * n + j]) * d_over_k;
        }
    }
    e
}

/// The closing term added to the endpoint relation.
fn endpoint_closure<S: OdeSystem>(
    problem: &BvpProblem<S>,
    tilde: &Trajectory,
    params: &RelaxationParams,
) -> Result<Vec<f64>> {
    let n = problem.dimension();
    match params.endpoint_closure {
        EndpointClosure::Dropped => Ok(vec![0.0; n]),
        EndpointClosure::Lagged => {
            let f_nodes = rhs_on_nodes(problem, tilde)?;
            let d_over_k = problem.grid().step() / params.relax_k;
            let e = error_terms_from_rhs(&f_nodes, n, d_over_k);
            Ok(e[e.len() - n..].to_vec())
        }
    }
}

struct EndpointSystem<'a, S> {
    problem: &'a BvpProblem<S>,
    /// `(K-1)/K (ũ_N - ũ_0) + closure`
    offset: Vec<f64>,
    /// `N d / K`
    horizon_over_k: f64,
    n_free: usize,
    free: Vec<usize>,
    unknown_end: Vec<usize>,
    f_end: Vec<f64>,
    jac_f: Matrix,
}

impl<'a, S: OdeSystem> EndpointSystem<'a, S> {
    fn new(
        problem: &'a BvpProblem<S>,
        tilde: &Trajectory,
        params: &RelaxationParams,
    ) -> Result<Self> {
        let n = problem.dimension();
        let k = params.relax_k;
        let closure = endpoint_closure(problem, tilde, params)?;
        let first = tilde.row(0);
        let last = tilde.row(tilde.len() - 1);
        let offset = (0..n)
            .map(|j| (k - 1.0) / k * (last[j] - first[j]) + closure[j])
            .collect();
        let grid = problem.grid();
        let free = problem.bc().free_at_start();
        Ok(Self {
            problem,
            offset,
            horizon_over_k: grid.n_nodes() as f64 * grid.step() / k,
            n_free: free.len(),
            free,
            unknown_end: problem.bc().unknown_at_end(),
            f_end: vec![0.0; n],
            jac_f: Matrix::zeros(n, n),
        })
    }
}

impl<S: OdeSystem> NonlinearSystem for EndpointSystem<'_, S> {
    fn residual(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (free, unknown) = EndpointUnknowns::split(x, self.n_free);
        let u0 = self.problem.assemble_start(free);
        let un = self.problem.assemble_end(unknown);
        let last = self.problem.grid().n_nodes();
        self.problem.rhs_at(last, &un, &mut self.f_end)?;
        for j in 0..out.len() {
            out[j] = un[j] - u0[j] - self.f_end[j] * self.horizon_over_k - self.offset[j];
        }
        Ok(())
    }

    fn jacobian(&mut self, x: &[f64], fx: &[f64], jac: &mut Matrix, fd_step: f64) -> Result<()> {
        let (_, unknown) = EndpointUnknowns::split(x, self.n_free);
        let un = self.problem.assemble_end(unknown);
        let grid = self.problem.grid();
        let analytic =
            self.problem
                .system()
                .jacobian(grid.time(grid.n_nodes()), &un, &mut self.jac_f);
        match analytic {
            None => crate::newton::fd_jacobian_into(self, x, fx, fd_step, jac),
            Some(r) => {
                r.map_err(Error::rhs_at(grid.n_nodes()))?;
                jac.fill(0.0);
                for (col, &j) in self.free.iter().enumerate() {
                    jac[(j, col)] = -1.0;
                }
                for (c, &i) in self.unknown_end.iter().enumerate() {
                    let col = self.n_free + c;
                    for row in 0..jac.rows() {
                        jac[(row, col)] = -self.horizon_over_k * self.jac_f[(row, i)];
                    }
                    jac[(i, col)] += 1.0;
                }
                Ok(())
            }
        }
    }
}

/// Residual of the endpoint system at `x`: for each component `j`,
/// `(u_N)_j - (u_0)_j - f_j(u_N) N d/K - (K-1)/K ((ũ_N)_j - (ũ_0)_j) - C_j`,
/// where `C` is zero for [`EndpointClosure::Dropped`] and the accumulated
/// error term of `ũ` at the last node for [`EndpointClosure::Lagged`].
pub fn endpoint_residual<S: OdeSystem>(
    x: &EndpointUnknowns,
    problem: &BvpProblem<S>,
    tilde: &Trajectory,
    params: &RelaxationParams,
) -> Result<Vec<f64>> {
    check_on_grid(problem, tilde)?;
    let mut sys = EndpointSystem::new(problem, tilde, params)?;
    let xv = x.to_vec();
    if xv.len() != problem.dimension() {
        return Err(Error::DimensionMismatch {
            expected: problem.dimension(),
            found: xv.len(),
        });
    }
    let mut out = vec![0.0; problem.dimension()];
    sys.residual(&xv, &mut out)?;
    Ok(out)
}

/// Solution of the endpoint system.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointSolution {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub newton: NewtonResult,
}

/// Solves the endpoint system by Newton from `guess`.
pub fn solve_endpoint<S: OdeSystem>(
    problem: &BvpProblem<S>,
    tilde: &Trajectory,
    params: &RelaxationParams,
    guess: &EndpointUnknowns,
) -> Result<EndpointSolution> {
    check_on_grid(problem, tilde)?;
    let x0 = guess.to_vec();
    let fail = |unknowns: Vec<f64>| {
        move |e: Error| Error::Endpoint {
            unknowns,
            source: Box::new(e),
        }
    };
    let mut sys = EndpointSystem::new(problem, tilde, params).map_err(fail(x0.clone()))?;
    let result =
        newton_solve_system(&mut sys, &x0, &newton_options(params)).map_err(fail(x0.clone()))?;
    if !result.converged {
        return Err(Error::Endpoint {
            unknowns: result.solution.clone(),
            source: Box::new(Error::NotConverged {
                iterations: result.iterations,
                residual: result.final_residual_norm,
            }),
        });
    }
    let (free, unknown) = EndpointUnknowns::split(&result.solution, sys.n_free);
    Ok(EndpointSolution {
        start: problem.assemble_start(free),
        end: problem.assemble_end(unknown),
        newton: result,
    })
}

/// One implicit backward step: unknown is the earlier node `p`, residual is
/// `target - p - f(p) d/K` with `target = u_next - (K-1)/K (ũ_next - ũ_prev)`.
struct StepSystem<'a, S> {
    problem: &'a BvpProblem<S>,
    node: usize,
    target: Vec<f64>,
    d_over_k: f64,
    f_buf: Vec<f64>,
    jac_f: Matrix,
}

impl<S: OdeSystem> NonlinearSystem for StepSystem<'_, S> {
    fn residual(&mut self, p: &[f64], out: &mut [f64]) -> Result<()> {
        self.problem.rhs_at(self.node, p, &mut self.f_buf)?;
        for j in 0..out.len() {
            out[j] = self.target[j] - p[j] - self.f_buf[j] * self.d_over_k;
        }
        Ok(())
    }

    fn jacobian(&mut self, p: &[f64], fx: &[f64], jac: &mut Matrix, fd_step: f64) -> Result<()> {
        let t = self.problem.grid().time(self.node);
        match self.problem.system().jacobian(t, p, &mut self.jac_f) {
            None => crate::newton::fd_jacobian_into(self, p, fx, fd_step, jac),
            Some(r) => {
                r.map_err(Error::rhs_at(self.node))?;
                let n = p.len();
                for i in 0..n {
                    for j in 0..n {
                        jac[(i, j)] = -self.d_over_k * self.jac_f[(i, j)];
                    }
                    jac[(i, i)] -= 1.0;
                }
                Ok(())
            }
        }
    }
}

/// Residual of the step between nodes `node` and `node + 1`:
/// `u_next - u_prev - f(u_prev) d/K - (K-1)/K (ũ_next - ũ_prev)`.
pub fn backward_step_residual<S: OdeSystem>(
    problem: &BvpProblem<S>,
    params: &RelaxationParams,
    node: usize,
    u_prev: &[f64],
    u_next: &[f64],
    tilde_prev: &[f64],
    tilde_next: &[f64],
) -> Result<Vec<f64>> {
    let n = problem.dimension();
    for v in [u_prev, u_next, tilde_prev, tilde_next] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let k = params.relax_k;
    let mut f = vec![0.0; n];
    problem.rhs_at(node, u_prev, &mut f)?;
    let d_over_k = problem.grid().step() / k;
    Ok((0..n)
        .map(|j| {
            u_next[j]
                - u_prev[j]
                - f[j] * d_over_k
                - (k - 1.0) / k * (tilde_next[j] - tilde_prev[j])
        })
        .collect())
}

/// Result of a backward sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    /// Swept trajectory with the pinned start components reset to their
    /// boundary values.
    pub trajectory: Trajectory,
    /// Start node exactly as the sweep produced it.
    pub swept_start: Vec<f64>,
    /// Total Newton iterations over all steps.
    pub newton_iterations: usize,
}

impl SweepOutput {
    /// Trajectory whose every step satisfies the step recursion, i.e. with
    /// the swept start node.
    pub fn raw_trajectory(&self) -> Trajectory {
        let mut raw = self.trajectory.clone();
        raw.row_mut(0).copy_from_slice(&self.swept_start);
        raw
    }
}

/// Recovers `u_{N-1}, ..., u_0` from `u_end` by one Newton solve per step,
/// each warm-started at the later node.
pub fn backward_sweep<S: OdeSystem>(
    u_end: &[f64],
    tilde: &Trajectory,
    problem: &BvpProblem<S>,
    params: &RelaxationParams,
) -> Result<SweepOutput> {
    check_on_grid(problem, tilde)?;
    let n = problem.dimension();
    if u_end.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u_end.len(),
        });
    }
    if let Some(component) = u_end.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEvaluation { component });
    }
    let grid = *problem.grid();
    let k = params.relax_k;
    let opts = newton_options(params);
    let mut traj = Trajectory::zeros(grid, n);
    traj.row_mut(grid.n_nodes()).copy_from_slice(u_end);
    let mut sys = StepSystem {
        problem,
        node: 0,
        target: vec![0.0; n],
        d_over_k: grid.step() / k,
        f_buf: vec![0.0; n],
        jac_f: Matrix::zeros(n, n),
    };
    let mut newton_iterations = 0;

    for next in (1..=grid.n_nodes()).rev() {
        let prev = next - 1;
        sys.node = prev;
        let (t_prev, t_next) = (tilde.row(prev), tilde.row(next));
        let u_next = traj.row(next).to_vec();
        for j in 0..n {
            sys.target[j] = u_next[j] - (k - 1.0) / k * (t_next[j] - t_prev[j]);
        }
        let result = newton_solve_system(&mut sys, &u_next, &opts).map_err(|e| Error::Sweep {
            node: prev,
            source: Box::new(e),
        })?;
        if !result.converged {
            return Err(Error::Sweep {
                node: prev,
                source: Box::new(Error::NotConverged {
                    iterations: result.iterations,
                    residual: result.final_residual_norm,
                }),
            });
        }
        newton_iterations += result.iterations;
        traj.row_mut(prev).copy_from_slice(&result.solution);
    }

    let swept_start = traj.row(0).to_vec();
    for (&j, &v) in &problem.bc().fixed_at_start {
        traj.row_mut(0)[j] = v;
    }
    Ok(SweepOutput {
        trajectory: traj,
        swept_start,
        newton_iterations,
    })
}

/// Exact accumulated error term of component `j` (0-based) at node `k`:
/// `sum_{m=1..k} m [f_j(u_{m-1}) - f_j(u_m)] d/K`.
pub fn error_term<S: OdeSystem>(
    u: &Trajectory,
    j: usize,
    k: usize,
    problem: &BvpProblem<S>,
    params: &RelaxationParams,
) -> Result<f64> {
    check_on_grid(problem, u)?;
    if k == 0 || k > problem.grid().n_nodes() {
        return Err(Error::InvalidParams(format!(
            "node {k} outside 1..={}",
            problem.grid().n_nodes()
        )));
    }
    if j >= problem.dimension() {
        return Err(Error::DimensionMismatch {
            expected: problem.dimension(),
            found: j + 1,
        });
    }
    let n = problem.dimension();
    let d_over_k = problem.grid().step() / params.relax_k;
    let mut f_prev = vec![0.0; n];
    let mut f_cur = vec![0.0; n];
    problem.rhs_at(0, u.row(0), &mut f_prev)?;
    let mut sum = 0.0;
    for m in 1..=k {
        problem.rhs_at(m, u.row(m), &mut f_cur)?;
        sum += m as f64 * (f_prev[j] - f_cur[j]);
        std::mem::swap(&mut f_prev, &mut f_cur);
    }
    Ok(sum * d_over_k)
}

/// Largest violation over all components and nodes `k >= 1` of
/// `u_k = u_0 + f(u_k) k d/K + (K-1)/K (ũ_k - ũ_0) + E_k`.
///
/// When every step of `u` satisfies the step recursion against `ũ` this is
/// an algebraic identity, so the result is at round-off level.
pub fn telescoping_identity_check<S: OdeSystem>(
    u: &Trajectory,
    tilde: &Trajectory,
    problem: &BvpProblem<S>,
    params: &RelaxationParams,
) -> Result<f64> {
    check_on_grid(problem, u)?;
    check_on_grid(problem, tilde)?;
    let n = problem.dimension();
    let k_relax = params.relax_k;
    let d_over_k = problem.grid().step() / k_relax;
    let f_nodes = rhs_on_nodes(problem, u)?;
    let e = error_terms_from_rhs(&f_nodes, n, d_over_k);
    let (u0, t0) = (u.row(0), tilde.row(0));
    let mut worst = 0.0_f64;
    for k in 1..u.len() {
        let (uk, tk) = (u.row(k), tilde.row(k));
        for j in 0..n {
            let rhs = u0[j]
                + f_nodes[k * n + j] * k as f64 * d_over_k
                + (k_relax - 1.0) / k_relax * (tk[j] - t0[j])
                + e[k * n + j];
            worst = worst.max((uk[j] - rhs).abs());
        }
    }
    Ok(worst)
}

/// Max over nodes and components of `|u_k - u_{k-1} - f(u_{k-1}) d|`.
pub fn euler_residual_norm<S: OdeSystem>(u: &Trajectory, problem: &BvpProblem<S>) -> Result<f64> {
    check_on_grid(problem, u)?;
    let n = problem.dimension();
    let d = problem.grid().step();
    let mut f = vec![0.0; n];
    let mut worst = 0.0_f64;
    for k in 1..u.len() {
        problem.rhs_at(k - 1, u.row(k - 1), &mut f)?;
        let (a, b) = (u.row(k - 1), u.row(k));
        for j in 0..n {
            worst = worst.max((b[j] - a[j] - f[j] * d).abs());
        }
    }
    Ok(worst)
}

/// `max |u - ũ| / (1 + |u|)` over all entries.
pub fn update_norm(u: &Trajectory, tilde: &Trajectory) -> f64 {
    u.as_flat()
        .iter()
        .zip(tilde.as_flat())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs() / (1.0 + a.abs())))
}

/// Everything one outer iteration produces.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub endpoint: EndpointSolution,
    pub sweep: SweepOutput,
    /// `max |swept u_0 - endpoint u_0|`.
    pub endpoint_discrepancy: f64,
}

/// One outer iteration from the previous iterate `tilde`.
pub fn relaxation_step<S: OdeSystem>(
    problem: &BvpProblem<S>,
    params: &RelaxationParams,
    tilde: &Trajectory,
) -> Result<IterationOutcome> {
    let guess = EndpointUnknowns::from_trajectory(problem, tilde);
    let endpoint = solve_endpoint(problem, tilde, params, &guess)?;
    let sweep = backward_sweep(&endpoint.end, tilde, problem, params)?;
    let endpoint_discrepancy = sweep
        .swept_start
        .iter()
        .zip(&endpoint.start)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(IterationOutcome {
        endpoint,
        sweep,
        endpoint_discrepancy,
    })
}

/// Runs outer iterations from `guess` until the relative update drops to
/// `outer_tol`.
///
/// Endpoint and sweep failures are returned as errors unless they occur
/// from an Anderson-extrapolated iterate, in which case the loop restarts
/// from the last plain sweep output and counts a `newton_failures` event.
/// Running out of iterations is not an error: the iterate with the smallest
/// update is returned with `converged = false`.
pub fn outer_iterate<S: OdeSystem>(
    problem: &BvpProblem<S>,
    params: &RelaxationParams,
    guess: &Trajectory,
) -> Result<(Trajectory, SolveReport)> {
    params.validate()?;
    check_on_grid(problem, guess)?;
    let grid = *problem.grid();
    let n = problem.dimension();
    let mut report = SolveReport::default();
    let mut acceleration = Anderson::new(params.anderson_depth);
    let mut tilde = guess.clone();
    let mut extrapolated = false;
    let mut last_plain: Option<Trajectory> = None;
    let mut best: Option<(f64, Trajectory)> = None;

    for iteration in 1..=params.max_outer_iter {
        report.outer_iterations = iteration;
        let outcome = match relaxation_step(problem, params, &tilde) {
            Ok(o) => o,
            Err(_) if extrapolated && last_plain.is_some() => {
                report.newton_failures += 1;
                acceleration.reset();
                tilde = last_plain.clone().expect("checked above");
                extrapolated = false;
                continue;
            }
            Err(e) => return Err(e),
        };
        let raw = outcome.sweep.raw_trajectory();
        report
            .identity_violation
            .push(telescoping_identity_check(&raw, &tilde, problem, params)?);
        report
            .endpoint_discrepancy
            .push(outcome.endpoint_discrepancy);

        let u = outcome.sweep.trajectory;
        let update = update_norm(&u, &tilde);
        report.residual_history.push(update);
        if !update.is_finite() || update > params.divergence_limit {
            return Err(Error::Divergence {
                iteration,
                update_norm: update,
            });
        }
        if update <= params.outer_tol {
            report.converged = true;
            report.final_euler_residual = euler_residual_norm(&u, problem)?;
            return Ok((u, report));
        }
        if best.as_ref().is_none_or(|(b, _)| update < *b) {
            best = Some((update, u.clone()));
        }

        let weights: Vec<f64> = u.as_flat().iter().map(|v| 1.0 / (1.0 + v.abs())).collect();
        let mut next = acceleration.next(tilde.as_flat(), u.as_flat(), &weights);
        for (&j, &v) in &problem.bc().fixed_at_start {
            next[j] = v;
        }
        extrapolated = params.anderson_depth > 0 && next.as_slice() != u.as_flat();
        tilde = match Trajectory::from_flat(grid, n, next) {
            Ok(t) => t,
            Err(_) => {
                acceleration.reset();
                extrapolated = false;
                u.clone()
            }
        };
        last_plain = Some(u);
    }

    let (_, u) = best.unwrap_or_else(|| (f64::INFINITY, tilde.clone()));
    report.final_euler_residual = euler_residual_norm(&u, problem)?;
    Ok((u, report))
}

/// Builds the initial guess and runs [`outer_iterate`].
pub fn solve<S: OdeSystem>(
    problem: &BvpProblem<S>,
    params: &RelaxationParams,
    free_start_defaults: &BTreeMap<usize, f64>,
) -> Result<(Trajectory, SolveReport)> {
    let guess = initial_guess(problem, free_start_defaults);
    outer_iterate(problem, params, &guess)
}
