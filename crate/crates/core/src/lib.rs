//! Two-point boundary value problems for first-order ODE systems, solved by
//! a proximal relaxation iteration in time with an explicit-Euler fixed
//! point, plus a climb-performance model and a shooting oracle.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod anderson;
pub mod error;
pub mod flight;
pub mod newton;
pub mod relaxation;
pub mod shooting;
pub mod systems;
pub mod types;

pub use error::{BoundaryError, Error, Result, RhsError};
pub use newton::{Matrix, NewtonOptions, NewtonResult};
pub use relaxation::{
    backward_step_residual, backward_sweep, endpoint_residual, error_term, euler_residual_norm,
    initial_guess, outer_iterate, solve, solve_endpoint, telescoping_identity_check, update_norm,
    EndpointSolution, EndpointUnknowns, SweepOutput,
};
pub use shooting::{Integrator, ShootingConfig, ShootingReport, ShootingStart};
pub use types::{
    BoundaryConditions, BvpProblem, EndpointClosure, Grid, OdeSystem, RelaxationParams,
    SolveReport, Trajectory,
};
