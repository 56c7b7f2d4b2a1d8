//! Solves `u1' = u2, u2' = -u1` with `u1(0) = 0`, `u1(pi/2) = 1` and checks
//! the result against Euler shooting on the same grid.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use gml_bvp::shooting::solve_shooting;
use gml_bvp::systems::HarmonicOscillator;
use gml_bvp::{
    solve, BoundaryConditions, BvpProblem, Grid, Integrator, RelaxationParams, ShootingConfig,
    ShootingStart,
};

fn main() -> gml_bvp::Result<()> {
    let bc = BoundaryConditions::new(2, [(0, 0.0)], [(0, 1.0)]);
    let problem = BvpProblem::new(
        HarmonicOscillator::default(),
        bc,
        Grid::new(2000, FRAC_PI_2)?,
    )?;
    let params = RelaxationParams {
        relax_k: 500.0,
        outer_tol: 1e-12,
        ..RelaxationParams::default()
    };

    let (u, report) = solve(&problem, &params, &BTreeMap::new())?;
    println!(
        "relaxation: converged={} after {} outer iterations, u2(0) = {:.12}",
        report.converged,
        report.outer_iterations,
        u.row(0)[1]
    );

    let shooting = ShootingConfig {
        integrator: Integrator::Euler,
        root_tol: 1e-13,
        max_root_iter: 50,
        start: ShootingStart::Guess(vec![0.5]),
    };
    let (oracle, _) = solve_shooting(&problem, &shooting)?;
    println!("euler shooting: u2(0) = {:.12}", oracle.row(0)[1]);
    println!("analytic:       u2(0) = 1");
    Ok(())
}
