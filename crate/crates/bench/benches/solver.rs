use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gml_bvp::flight::{make_flight_problem, FlightParams, CLIMB_GAMMA_GUESS, PATH_ANGLE};
use gml_bvp::newton::{lu_solve, newton_solve, Matrix, NewtonOptions};
use gml_bvp::relaxation::{backward_sweep, relaxation_step};
use gml_bvp::shooting::{integrate, solve_shooting};
use gml_bvp::systems::HarmonicOscillator;
use gml_bvp::{
    initial_guess, solve, BoundaryConditions, BvpProblem, Grid, Integrator, RelaxationParams,
    ShootingConfig, ShootingStart,
};

fn oscillator(n: usize) -> BvpProblem<HarmonicOscillator> {
    let bc = BoundaryConditions::new(2, [(0, 0.0)], [(0, 1.0)]);
    BvpProblem::new(
        HarmonicOscillator::default(),
        bc,
        Grid::new(n, FRAC_PI_2).unwrap(),
    )
    .unwrap()
}

fn kernels(c: &mut Criterion) {
    let a = Matrix::from_rows(&[
        &[4.0, 1.0, 0.5, 0.0],
        &[1.0, 5.0, 0.0, 0.3],
        &[0.2, 0.0, 3.0, 1.0],
        &[0.0, 0.7, 1.0, 6.0],
    ]);
    let b = [1.0, -2.0, 0.5, 3.0];
    c.bench_function("lu_solve_4x4", |bench| {
        bench.iter(|| lu_solve(black_box(&a), black_box(&b)).unwrap())
    });

    c.bench_function("newton_2d", |bench| {
        bench.iter(|| {
            newton_solve(
                |x, out| {
                    out[0] = x[0] * x[0] + x[1] * x[1] - 4.0;
                    out[1] = x[0] - x[1].sin();
                    Ok(())
                },
                black_box(&[1.0, 1.0]),
                &NewtonOptions::default(),
            )
            .unwrap()
        })
    });
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("backward_sweep");
    for n in [500, 2000, 8000] {
        let p = oscillator(n);
        let tilde = initial_guess(&p, &BTreeMap::new());
        let params = RelaxationParams::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| backward_sweep(black_box(&[1.0, 0.0]), &tilde, &p, &params).unwrap())
        });
    }
    group.finish();

    let flight = make_flight_problem(FlightParams::default(), 3000).unwrap();
    let tilde = initial_guess(&flight, &BTreeMap::from([(PATH_ANGLE, CLIMB_GAMMA_GUESS)]));
    let params = RelaxationParams::default();
    c.bench_function("flight_outer_iteration_3000", |bench| {
        bench.iter(|| relaxation_step(&flight, &params, black_box(&tilde)).unwrap())
    });
}

fn solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let p = oscillator(2000);
    let params = RelaxationParams {
        relax_k: 500.0,
        outer_tol: 1e-12,
        ..RelaxationParams::default()
    };
    group.bench_function("oscillator_relaxation_2000", |bench| {
        bench.iter(|| solve(&p, &params, &BTreeMap::new()).unwrap())
    });
    let shooting = ShootingConfig {
        integrator: Integrator::Euler,
        root_tol: 1e-12,
        max_root_iter: 50,
        start: ShootingStart::Guess(vec![0.5]),
    };
    group.bench_function("oscillator_shooting_2000", |bench| {
        bench.iter(|| solve_shooting(&p, &shooting).unwrap())
    });
    group.finish();

    let mut group = c.benchmark_group("integrate_3000");
    let flight = make_flight_problem(FlightParams::default(), 3000).unwrap();
    let u0 = [0.0, CLIMB_GAMMA_GUESS, 150.0, 0.0];
    for integ in [Integrator::Euler, Integrator::Rk4] {
        group.bench_function(integ.to_string(), |bench| {
            bench.iter(|| integrate(integ, flight.system(), black_box(&u0), flight.grid()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, sweeps, solves);
criterion_main!(benches);
