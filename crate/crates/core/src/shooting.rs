//! Single shooting on the free initial components, used to cross-check the
//! relaxation solver.
//!
//! With the explicit Euler integrator on the solver's own grid the shooting
//! solution satisfies the same discrete equations as a converged relaxation
//! run, so the two agree to solver tolerance rather than to truncation error.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::newton::{newton_solve, norm_inf, NewtonOptions};
use crate::types::{BvpProblem, Grid, OdeSystem, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

impl FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(format!(
                "unknown integrator `{other}` (expected euler or rk4)"
            )),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::Euler => "euler",
            Integrator::Rk4 => "rk4",
        })
    }
}

/// How the root search over the free start components begins.
#[derive(Debug, Clone, PartialEq)]
pub enum ShootingStart {
    /// Sign-changing bracket for a single free component; solved by
    /// bisection.
    Bracket { lo: f64, hi: f64 },
    /// Starting point for damped Newton on the terminal mismatch.
    Guess(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingConfig {
    pub integrator: Integrator,
    pub root_tol: f64,
    pub max_root_iter: usize,
    pub start: ShootingStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    None,
    Bisection,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingReport {
    pub method: RootMethod,
    pub free_start: Vec<f64>,
    pub iterations: usize,
    /// `|terminal mismatch|_inf` at `free_start`.
    pub mismatch_norm: f64,
    pub converged: bool,
}

/// `u_k = u_{k-1} + f(t_{k-1}, u_{k-1}) d`.
pub fn euler_integrate<S: OdeSystem + ?Sized>(
    system: &S,
    u0: &[f64],
    grid: &Grid,
) -> Result<Trajectory> {
    let n = u0.len();
    let d = grid.step();
    let mut values = Vec::with_capacity((grid.n_nodes() + 1) * n);
    values.extend_from_slice(u0);
    let mut f = vec![0.0; n];
    for k in 1..=grid.n_nodes() {
        let prev = &values[(k - 1) * n..k * n];
        system
            .rhs(grid.time(k - 1), prev, &mut f)
            .map_err(Error::rhs_at(k - 1))?;
        let next: Vec<f64> = prev.iter().zip(&f).map(|(u, du)| u + du * d).collect();
        values.extend_from_slice(&next);
    }
    Trajectory::from_flat(*grid, n, values)
}

/// Classical four-stage Runge-Kutta on the grid.
pub fn rk4_integrate<S: OdeSystem + ?Sized>(
    system: &S,
    u0: &[f64],
    grid: &Grid,
) -> Result<Trajectory> {
    let n = u0.len();
    let h = grid.step();
    let mut values = Vec::with_capacity((grid.n_nodes() + 1) * n);
    values.extend_from_slice(u0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut stage = vec![0.0; n];
    for k in 1..=grid.n_nodes() {
        let t = grid.time(k - 1);
        let u = values[(k - 1) * n..k * n].to_vec();
        let at = Error::rhs_at(k - 1);
        system.rhs(t, &u, &mut k1).map_err(&at)?;
        for i in 0..n {
            stage[i] = u[i] + 0.5 * h * k1[i];
        }
        system.rhs(t + 0.5 * h, &stage, &mut k2).map_err(&at)?;
        for i in 0..n {
            stage[i] = u[i] + 0.5 * h * k2[i];
        }
        system.rhs(t + 0.5 * h, &stage, &mut k3).map_err(&at)?;
        for i in 0..n {
            stage[i] = u[i] + h * k3[i];
        }
        system.rhs(t + h, &stage, &mut k4).map_err(&at)?;
        for i in 0..n {
            values.push(u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
    }
    Trajectory::from_flat(*grid, n, values)
}

pub fn integrate<S: OdeSystem + ?Sized>(
    integrator: Integrator,
    system: &S,
    u0: &[f64],
    grid: &Grid,
) -> Result<Trajectory> {
    match integrator {
        Integrator::Euler => euler_integrate(system, u0, grid),
        Integrator::Rk4 => rk4_integrate(system, u0, grid),
    }
}

fn shoot<S: OdeSystem>(
    free_start: &[f64],
    problem: &BvpProblem<S>,
    integrator: Integrator,
) -> Result<(Trajectory, Vec<f64>)> {
    let expected = problem.bc().free_at_start().len();
    if free_start.len() != expected {
        return Err(Error::ShootingSetup {
            expected,
            found: free_start.len(),
        });
    }
    let u0 = problem.assemble_start(free_start);
    let traj = integrate(integrator, problem.system(), &u0, problem.grid())?;
    let last = traj.row(traj.len() - 1);
    let mismatch = problem
        .bc()
        .fixed_at_end
        .iter()
        .map(|(&j, &v)| last[j] - v)
        .collect();
    Ok((traj, mismatch))
}

/// Computed minus prescribed terminal value for each component pinned at
/// the end, in ascending index order.
pub fn terminal_mismatch<S: OdeSystem>(
    free_start: &[f64],
    problem: &BvpProblem<S>,
    config: &ShootingConfig,
) -> Result<Vec<f64>> {
    shoot(free_start, problem, config.integrator).map(|(_, m)| m)
}

/// Finds free start values that zero the terminal mismatch and returns the
/// integrated trajectory.
pub fn solve_shooting<S: OdeSystem>(
    problem: &BvpProblem<S>,
    config: &ShootingConfig,
) -> Result<(Trajectory, ShootingReport)> {
    if !(config.root_tol > 0.0) {
        return Err(Error::InvalidParams("root_tol must be positive".into()));
    }
    let n_free = problem.bc().free_at_start().len();
    if n_free == 0 {
        let (traj, mismatch) = shoot(&[], problem, config.integrator)?;
        return Ok((
            traj,
            ShootingReport {
                method: RootMethod::None,
                free_start: Vec::new(),
                iterations: 0,
                mismatch_norm: norm_inf(&mismatch),
                converged: true,
            },
        ));
    }
    let (free_start, iterations, method) = match &config.start {
        ShootingStart::Bracket { lo, hi } => {
            if n_free != 1 {
                return Err(Error::ShootingSetup {
                    expected: n_free,
                    found: 1,
                });
            }
            let (x, it) = bisect(*lo, *hi, problem, config)?;
            (vec![x], it, RootMethod::Bisection)
        }
        ShootingStart::Guess(x0) => {
            if x0.len() != n_free {
                return Err(Error::ShootingSetup {
                    expected: n_free,
                    found: x0.len(),
                });
            }
            let opts = NewtonOptions {
                tol: config.root_tol,
                max_iter: config.max_root_iter,
                ..NewtonOptions::default()
            };
            let r = newton_solve(
                |x, out| {
                    out.copy_from_slice(&terminal_mismatch(x, problem, config)?);
                    Ok(())
                },
                x0,
                &opts,
            )?;
            (r.solution, r.iterations, RootMethod::Newton)
        }
    };
    let (traj, mismatch) = shoot(&free_start, problem, config.integrator)?;
    let mismatch_norm = norm_inf(&mismatch);
    let converged = match method {
        RootMethod::Bisection => {
            iterations < config.max_root_iter || mismatch_norm <= config.root_tol
        }
        _ => mismatch_norm <= config.root_tol,
    };
    Ok((
        traj,
        ShootingReport {
            method,
            free_start,
            iterations,
            mismatch_norm,
            converged,
        },
    ))
}

/// Bisection on a single free component. Stops when the mismatch is within
/// `root_tol` or the bracket is narrower than `root_tol`.
fn bisect<S: OdeSystem>(
    lo: f64,
    hi: f64,
    problem: &BvpProblem<S>,
    config: &ShootingConfig,
) -> Result<(f64, usize)> {
    let eval = |x: f64| -> Result<f64> { Ok(terminal_mismatch(&[x], problem, config)?[0]) };
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let (mut f_lo, f_hi) = (eval(lo)?, eval(hi)?);
    if f_lo == 0.0 {
        return Ok((lo, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut iterations = 0;
    while iterations < config.max_root_iter {
        let mid = lo + 0.5 * (hi - lo);
        let f_mid = eval(mid)?;
        iterations += 1;
        if f_mid.abs() <= config.root_tol
            || 0.5 * (hi - lo) <= config.root_tol
            || mid == lo
            || mid == hi
        {
            return Ok((mid, iterations));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + 0.5 * (hi - lo), iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flight::make_flight_problem;
    use crate::relaxation::euler_residual_norm;
    use crate::systems::{HarmonicOscillator, ScalarLinear, ZeroSystem};
    use crate::types::BoundaryConditions;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    fn growth() -> ScalarLinear {
        ScalarLinear {
            slope: 1.0,
            offset: 0.0,
        }
    }

    fn unit_rate() -> ScalarLinear {
        ScalarLinear {
            slope: 0.0,
            offset: 1.0,
        }
    }

    fn euler_config(start: ShootingStart) -> ShootingConfig {
        ShootingConfig {
            integrator: Integrator::Euler,
            root_tol: 1e-12,
            max_root_iter: 100,
            start,
        }
    }

    fn end_error(integrator: Integrator, n: usize) -> f64 {
        let t = integrate(integrator, &growth(), &[1.0], &Grid::new(n, 1.0).unwrap()).unwrap();
        (t.row(n)[0] - E).abs()
    }

    #[test]
    fn integrators_keep_quiescent_state() {
        let grid = Grid::new(7, 3.0).unwrap();
        for integ in [Integrator::Euler, Integrator::Rk4] {
            let t = integrate(integ, &ZeroSystem { dimension: 2 }, &[1.0, -4.0], &grid).unwrap();
            assert!(t.rows().all(|r| r == [1.0, -4.0]));
        }
    }

    #[test]
    fn euler_exact_for_constant_rhs() {
        let t = euler_integrate(&unit_rate(), &[0.0], &Grid::new(10, 1.0).unwrap()).unwrap();
        assert_relative_eq!(t.row(10)[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn euler_compound_growth() {
        let grid = Grid::new(50, 2.0).unwrap();
        let t = euler_integrate(&growth(), &[1.0], &grid).unwrap();
        let d = grid.step();
        assert_relative_eq!(t.row(50)[0], (1.0 + d).powi(50), max_relative = 1e-13);
    }

    #[test]
    fn rk4_matches_exponential() {
        assert!(end_error(Integrator::Rk4, 100) <= 1e-8);
    }

    #[test]
    fn rk4_conserves_oscillator_energy() {
        let grid = Grid::new(1000, PI).unwrap();
        let t = rk4_integrate(&HarmonicOscillator::default(), &[0.3, 0.8], &grid).unwrap();
        let e0 = 0.3f64.powi(2) + 0.8f64.powi(2);
        for r in t.rows() {
            assert!((r[0] * r[0] + r[1] * r[1] - e0).abs() <= 1e-8);
        }
    }

    #[test]
    fn euler_is_first_order() {
        let ratio = end_error(Integrator::Euler, 200) / end_error(Integrator::Euler, 400);
        assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let ratio = end_error(Integrator::Rk4, 20) / end_error(Integrator::Rk4, 40);
        assert!((ratio - 16.0).abs() <= 16.0 * 0.3, "ratio {ratio}");
    }

    #[test]
    fn integration_error_names_node() {
        // vertical climb from 5 m/s stalls within a few steps
        let p = make_flight_problem(Default::default(), 3000).unwrap();
        match euler_integrate(p.system(), &[0.0, FRAC_PI_2, 5.0, 0.0], p.grid()) {
            Err(Error::Rhs { node: Some(k), .. }) => assert!(k > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn unit_rate_problem() -> BvpProblem<ScalarLinear> {
        let bc = BoundaryConditions::new(1, [], [(0, 1.0)]);
        BvpProblem::new(unit_rate(), bc, Grid::new(10, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn mismatch_is_linear_in_start() {
        let p = unit_rate_problem();
        let cfg = euler_config(ShootingStart::Guess(vec![0.0]));
        assert!(terminal_mismatch(&[0.0], &p, &cfg).unwrap()[0].abs() < 1e-15);
        assert_relative_eq!(
            terminal_mismatch(&[0.5], &p, &cfg).unwrap()[0],
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn recovers_unit_rate_start() {
        let p = unit_rate_problem();
        for start in [
            ShootingStart::Bracket { lo: -1.0, hi: 2.0 },
            ShootingStart::Guess(vec![3.0]),
        ] {
            let (t, r) = solve_shooting(&p, &euler_config(start)).unwrap();
            assert!(r.converged);
            assert!(t.row(0)[0].abs() <= 1e-12);
            assert!(r.mismatch_norm <= 1e-12);
        }
    }

    #[test]
    fn bisection_iteration_bound() {
        let p = unit_rate_problem();
        let (lo, hi, tol) = (-1.0, 2.0, 1e-9);
        let cfg = ShootingConfig {
            root_tol: tol,
            ..euler_config(ShootingStart::Bracket { lo, hi })
        };
        // shift the root off the dyadic midpoints
        let bc = BoundaryConditions::new(1, [], [(0, 1.0 + 0.1234567)]);
        let p = BvpProblem::new(*p.system(), bc, *p.grid()).unwrap();
        let (_, r) = solve_shooting(&p, &cfg).unwrap();
        let bound = ((hi - lo) / tol).log2().ceil() as usize + 2;
        assert!(r.iterations <= bound, "{} > {bound}", r.iterations);
        assert!((r.free_start[0] - 0.1234567).abs() <= tol);
    }

    #[test]
    fn bracket_without_sign_change_is_rejected() {
        let p = unit_rate_problem();
        let cfg = euler_config(ShootingStart::Bracket { lo: 1.0, hi: 2.0 });
        assert!(matches!(
            solve_shooting(&p, &cfg),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn wrong_guess_length_is_rejected() {
        let p = unit_rate_problem();
        let cfg = euler_config(ShootingStart::Guess(vec![0.0, 1.0]));
        assert!(matches!(
            solve_shooting(&p, &cfg),
            Err(Error::ShootingSetup {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn oscillator_rk4_recovers_analytic_slope() {
        let bc = BoundaryConditions::new(2, [(0, 0.0)], [(0, 1.0)]);
        let p = BvpProblem::new(
            HarmonicOscillator::default(),
            bc,
            Grid::new(2000, FRAC_PI_2).unwrap(),
        )
        .unwrap();
        let cfg = ShootingConfig {
            integrator: Integrator::Rk4,
            ..euler_config(ShootingStart::Guess(vec![0.5]))
        };
        let (t, r) = solve_shooting(&p, &cfg).unwrap();
        assert!(r.converged);
        assert!((t.row(0)[1] - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn euler_shooting_satisfies_recursion() {
        let bc = BoundaryConditions::new(2, [(0, 0.0)], [(0, 1.0)]);
        let p = BvpProblem::new(
            HarmonicOscillator::default(),
            bc,
            Grid::new(500, FRAC_PI_2).unwrap(),
        )
        .unwrap();
        let (t, _) = solve_shooting(&p, &euler_config(ShootingStart::Guess(vec![0.5]))).unwrap();
        assert!(euler_residual_norm(&t, &p).unwrap() <= 1e-12 * t.scale());
    }

    #[test]
    fn ivp_needs_no_root_search() {
        let bc = BoundaryConditions::new(1, [(0, 1.0)], []);
        let p = BvpProblem::new(growth(), bc, Grid::new(10, 1.0).unwrap()).unwrap();
        let (t, r) = solve_shooting(&p, &euler_config(ShootingStart::Guess(vec![]))).unwrap();
        assert_eq!(r.method, RootMethod::None);
        assert_relative_eq!(t.row(10)[0], 1.1f64.powi(10), max_relative = 1e-14);
    }

    #[test]
    fn flight_mismatch_undershoots_on_both_sides() {
        // The canonical climb cannot reach 11000 m; both ends of the
        // customary bracket fall short.
        let p = make_flight_problem(Default::default(), 3000).unwrap();
        let cfg = euler_config(ShootingStart::Bracket { lo: 0.0, hi: 0.1 });
        let low = terminal_mismatch(&[0.0], &p, &cfg).unwrap()[0];
        let steep = terminal_mismatch(&[0.1], &p, &cfg).unwrap()[0];
        assert!((low + 473.57).abs() < 0.01, "{low}");
        assert!((steep + 656.75).abs() < 0.01, "{steep}");
        assert!(matches!(
            solve_shooting(&p, &cfg),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn integrator_names_round_trip() {
        for integ in [Integrator::Euler, Integrator::Rk4] {
            assert_eq!(integ.to_string().parse::<Integrator>().unwrap(), integ);
        }
        assert!("midpoint".parse::<Integrator>().is_err());
    }
}
