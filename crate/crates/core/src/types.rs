//! Problem-definition and solution types shared by the solver, the flight
//! model and the shooting oracle.

use std::collections::BTreeMap;

use crate::error::{BoundaryError, Error, Result, RhsError};
use crate::newton::Matrix;

/// Uniform time grid on `[0, t_final]` with `n_nodes` intervals.
///
/// Nodes are `t_k = k * step` for `k = 0..=n_nodes`; the step is always
/// derived from the other two fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_nodes: usize,
    t_final: f64,
}

impl Grid {
    pub fn new(n_nodes: usize, t_final: f64) -> Result<Self> {
        if n_nodes < 2 || !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidGrid { n_nodes, t_final });
        }
        Ok(Self { n_nodes, t_final })
    }

    /// Number of intervals; the grid carries `n_nodes + 1` node values.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn step(&self) -> f64 {
        self.t_final / self.n_nodes as f64
    }

    /// Time of node `k`; the last node is exactly `t_final`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_nodes {
            self.t_final
        } else {
            k as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_nodes).map(|k| self.time(k))
    }
}

/// Values pinned at `t = 0` and `t = t_final`, keyed by 0-based component
/// index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryConditions {
    pub dimension: usize,
    pub fixed_at_start: BTreeMap<usize, f64>,
    pub fixed_at_end: BTreeMap<usize, f64>,
}

impl BoundaryConditions {
    pub fn new(
        dimension: usize,
        fixed_at_start: impl IntoIterator<Item = (usize, f64)>,
        fixed_at_end: impl IntoIterator<Item = (usize, f64)>,
    ) -> Self {
        Self {
            dimension,
            fixed_at_start: fixed_at_start.into_iter().collect(),
            fixed_at_end: fixed_at_end.into_iter().collect(),
        }
    }

    /// Checks the counting rule: one condition per component, so the
    /// number of components free at the start equals the number of
    /// conditions pinned at the end.
    pub fn validate(&self) -> Result<(), BoundaryError> {
        if self.dimension == 0 {
            return Err(BoundaryError::ZeroDimension);
        }
        for (&j, &v) in self.fixed_at_start.iter().chain(&self.fixed_at_end) {
            if j >= self.dimension {
                return Err(BoundaryError::IndexOutOfRange {
                    label: j + 1,
                    dimension: self.dimension,
                });
            }
            if !v.is_finite() {
                return Err(BoundaryError::NonFiniteValue { label: j + 1 });
            }
        }
        let conditions = self.fixed_at_start.len() + self.fixed_at_end.len();
        match conditions.cmp(&self.dimension) {
            std::cmp::Ordering::Less => Err(BoundaryError::UnderDetermined {
                conditions,
                dimension: self.dimension,
            }),
            std::cmp::Ordering::Greater => Err(BoundaryError::OverDetermined {
                conditions,
                dimension: self.dimension,
            }),
            std::cmp::Ordering::Equal => Ok(()),
        }
    }

    /// Components not pinned at `t = 0`, ascending.
    pub fn free_at_start(&self) -> Vec<usize> {
        (0..self.dimension)
            .filter(|j| !self.fixed_at_start.contains_key(j))
            .collect()
    }

    /// Components not pinned at `t = t_final`, ascending.
    pub fn unknown_at_end(&self) -> Vec<usize> {
        (0..self.dimension)
            .filter(|j| !self.fixed_at_end.contains_key(j))
            .collect()
    }
}

/// First-order system `du/dt = f(t, u)`.
pub trait OdeSystem {
    fn dimension(&self) -> usize;

    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), RhsError>;

    /// Analytic Jacobian `df/du`, when the system provides one. `None` means
    /// callers fall back to finite differences.
    fn jacobian(&self, _t: f64, _u: &[f64], _jac: &mut Matrix) -> Option<Result<(), RhsError>> {
        None
    }

    /// Labels used for CSV headers and reports.
    fn component_names(&self) -> Vec<String> {
        (1..=self.dimension()).map(|j| format!("u{j}")).collect()
    }
}

impl<S: OdeSystem + ?Sized> OdeSystem for &S {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), RhsError> {
        (**self).rhs(t, u, du)
    }
    fn jacobian(&self, t: f64, u: &[f64], jac: &mut Matrix) -> Option<Result<(), RhsError>> {
        (**self).jacobian(t, u, jac)
    }
    fn component_names(&self) -> Vec<String> {
        (**self).component_names()
    }
}

impl<S: OdeSystem + ?Sized> OdeSystem for Box<S> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), RhsError> {
        (**self).rhs(t, u, du)
    }
    fn jacobian(&self, t: f64, u: &[f64], jac: &mut Matrix) -> Option<Result<(), RhsError>> {
        (**self).jacobian(t, u, jac)
    }
    fn component_names(&self) -> Vec<String> {
        (**self).component_names()
    }
}

/// A first-order system with separated boundary conditions on a grid.
#[derive(Debug, Clone)]
pub struct BvpProblem<S> {
    system: S,
    bc: BoundaryConditions,
    grid: Grid,
}

impl<S: OdeSystem> BvpProblem<S> {
    pub fn new(system: S, bc: BoundaryConditions, grid: Grid) -> Result<Self> {
        if system.dimension() != bc.dimension {
            return Err(Error::DimensionMismatch {
                expected: system.dimension(),
                found: bc.dimension,
            });
        }
        bc.validate()?;
        Ok(Self { system, bc, grid })
    }

    pub fn system(&self) -> &S {
        &self.system
    }

    pub fn bc(&self) -> &BoundaryConditions {
        &self.bc
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dimension(&self) -> usize {
        self.bc.dimension
    }

    /// Same system and conditions on another grid.
    pub fn with_grid(&self, grid: Grid) -> Self
    where
        S: Clone,
    {
        Self {
            system: self.system.clone(),
            bc: self.bc.clone(),
            grid,
        }
    }

    /// Evaluates the right-hand side at node `k`, tagging failures with the
    /// node index.
    pub(crate) fn rhs_at(&self, k: usize, u: &[f64], du: &mut [f64]) -> Result<()> {
        self.system
            .rhs(self.grid.time(k), u, du)
            .map_err(Error::rhs_at(k))
    }

    /// Start state with the pinned components set and the free ones taken
    /// from `free_values` in ascending index order.
    pub fn assemble_start(&self, free_values: &[f64]) -> Vec<f64> {
        let mut u0 = vec![0.0; self.dimension()];
        for (&j, &v) in &self.bc.fixed_at_start {
            u0[j] = v;
        }
        for (j, &v) in self.bc.free_at_start().into_iter().zip(free_values) {
            u0[j] = v;
        }
        u0
    }

    /// End state with the pinned components set and the rest taken from
    /// `unknown_values` in ascending index order.
    pub fn assemble_end(&self, unknown_values: &[f64]) -> Vec<f64> {
        let mut un = vec![0.0; self.dimension()];
        for (&j, &v) in &self.bc.fixed_at_end {
            un[j] = v;
        }
        for (j, &v) in self.bc.unknown_at_end().into_iter().zip(unknown_values) {
            un[j] = v;
        }
        un
    }
}

/// State values at every node of a grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid,
    dimension: usize,
    values: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory from one state vector per node. Rejects a wrong
    /// row count, ragged rows and non-finite entries.
    pub fn from_rows(grid: Grid, rows: &[Vec<f64>]) -> Result<Self> {
        let expected = grid.n_nodes() + 1;
        if rows.len() != expected {
            return Err(Error::RowCount {
                expected,
                found: rows.len(),
            });
        }
        let dimension = rows[0].len();
        let mut values = Vec::with_capacity(expected * dimension);
        for row in rows {
            if row.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(grid, dimension, values)
    }

    /// Builds a trajectory from row-major storage.
    pub fn from_flat(grid: Grid, dimension: usize, values: Vec<f64>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if values.len() != dimension * (grid.n_nodes() + 1) {
            return Err(Error::RowCount {
                expected: grid.n_nodes() + 1,
                found: values.len() / dimension,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteTrajectory {
                node: i / dimension,
                label: i % dimension + 1,
            });
        }
        Ok(Self {
            grid,
            dimension,
            values,
        })
    }

    pub(crate) fn zeros(grid: Grid, dimension: usize) -> Self {
        Self {
            grid,
            dimension,
            values: vec![0.0; (grid.n_nodes() + 1) * dimension],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of stored nodes, `n_nodes + 1`.
    pub fn len(&self) -> usize {
        self.grid.n_nodes() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dimension..(k + 1) * self.dimension]
    }

    pub(crate) fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.dimension..(k + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dimension)
    }

    /// Values of component `j` (0-based) along the grid.
    pub fn component(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry, floored at 1.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
    }
}

/// How the endpoint system treats the accumulated error term at the last
/// node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointClosure {
    /// Omit the term entirely.
    Dropped,
    /// Evaluate the term on the previous iterate. At a fixed point this makes
    /// the endpoint relation exact.
    #[default]
    Lagged,
}

/// Parameters of the outer relaxation loop and its inner Newton solves.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationParams {
    /// Relaxation constant, strictly greater than 1.
    pub relax_k: f64,
    pub outer_tol: f64,
    pub max_outer_iter: usize,
    /// Absolute residual tolerance for every endpoint and sweep Newton solve.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub endpoint_closure: EndpointClosure,
    /// Anderson mixing depth for the outer loop; 0 replaces the previous
    /// iterate by the new one unchanged.
    pub anderson_depth: usize,
    /// Abort once the outer update norm exceeds this value.
    pub divergence_limit: f64,
}

impl Default for RelaxationParams {
    fn default() -> Self {
        Self {
            relax_k: 509.0,
            outer_tol: 1e-8,
            max_outer_iter: 500,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            endpoint_closure: EndpointClosure::Lagged,
            anderson_depth: 16,
            divergence_limit: 1e6,
        }
    }
}

impl RelaxationParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_owned()));
        if !(self.relax_k > 1.0) || !self.relax_k.is_finite() {
            return bad("relax_k must be a finite number greater than 1");
        }
        if !(self.outer_tol > 0.0) || !(self.newton_tol > 0.0) {
            return bad("tolerances must be strictly positive");
        }
        if self.max_outer_iter == 0 || self.newton_max_iter == 0 {
            return bad("iteration caps must be positive");
        }
        if !(self.divergence_limit > 0.0) {
            return bad("divergence_limit must be positive");
        }
        Ok(())
    }
}

/// Outcome of an outer relaxation run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub converged: bool,
    pub outer_iterations: usize,
    /// Relative sup-norm of `u - u_prev` after each outer iteration.
    pub residual_history: Vec<f64>,
    /// Sweeps that failed from an extrapolated iterate and were redone from
    /// the plain iterate.
    pub newton_failures: usize,
    /// Explicit-Euler defect of the returned trajectory.
    pub final_euler_residual: f64,
    /// Per iteration: max difference between the swept start node and the
    /// start node produced by the endpoint solve.
    pub endpoint_discrepancy: Vec<f64>,
    /// Per iteration: telescoping identity violation of the raw sweep.
    pub identity_violation: Vec<f64>,
}
