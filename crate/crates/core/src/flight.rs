//! In-plane climb of a transport aircraft at constant angle of attack and
//! thrust.
//!
//! State layout is `(h, gamma, V, x)`: altitude [m], flight-path angle
//! [rad], airspeed [m/s] and horizontal range [m].

use crate::error::{Result, RhsError};
use crate::newton::Matrix;
use crate::types::{BoundaryConditions, BvpProblem, Grid, OdeSystem};

/// Sea-level density [kg/m^3].
pub const RHO_SEA_LEVEL: f64 = 1.225;
/// Temperature lapse rate [K/m].
pub const LAPSE_RATE: f64 = 0.0065;
/// Sea-level temperature [K].
pub const T_SEA_LEVEL: f64 = 288.15;
pub const DENSITY_EXPONENT: f64 = 4.225;
/// RHS evaluation is refused below this airspeed [m/s].
pub const MIN_SPEED: f64 = 1e-6;

/// Horizon of the canonical climb [s].
pub const CLIMB_T_FINAL: f64 = 532.0;
pub const CLIMB_N_NODES: usize = 3000;
pub const CLIMB_TARGET_ALTITUDE: f64 = 11_000.0;
pub const CLIMB_INITIAL_SPEED: f64 = 150.0;
/// Starting guess for the free initial flight-path angle [rad].
pub const CLIMB_GAMMA_GUESS: f64 = 0.05;

pub const ALTITUDE: usize = 0;
pub const PATH_ANGLE: usize = 1;
pub const SPEED: usize = 2;
pub const RANGE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightParams {
    /// [kg]
    pub mass: f64,
    /// [m^2]
    pub wing_area: f64,
    /// [rad]
    pub angle_of_attack: f64,
    /// Thrust line offset from the wing reference [rad].
    pub thrust_offset: f64,
    /// [m/s^2]
    pub gravity: f64,
    pub cd0: f64,
    pub k1: f64,
    pub k2: f64,
    /// Lift-curve slope [1/rad].
    pub cl_alpha: f64,
    /// [N]
    pub thrust: f64,
}

impl Default for FlightParams {
    /// A320-class numbers.
    fn default() -> Self {
        Self {
            mass: 120_000.0,
            wing_area: 260.0,
            angle_of_attack: 0.0945,
            thrust_offset: 0.03225,
            gravity: 9.8,
            cd0: 0.0175,
            k1: 0.0,
            k2: 0.06,
            cl_alpha: 5.0,
            thrust: 240_000.0,
        }
    }
}

impl FlightParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let all = [
            self.mass,
            self.wing_area,
            self.angle_of_attack,
            self.thrust_offset,
            self.gravity,
            self.cd0,
            self.k1,
            self.k2,
            self.cl_alpha,
            self.thrust,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err("flight parameters must be finite".into());
        }
        if !(self.mass > 0.0) || !(self.wing_area > 0.0) || !(self.gravity > 0.0) {
            return Err("mass, wing_area and gravity must be positive".into());
        }
        if self.thrust < 0.0 {
            return Err("thrust must be non-negative".into());
        }
        Ok(())
    }

    pub fn lift_coefficient(&self) -> f64 {
        self.cl_alpha * self.angle_of_attack
    }

    /// Quadratic drag polar `cd0 + k1 CL + k2 CL^2`.
    pub fn drag_coefficient(&self) -> f64 {
        let cl = self.lift_coefficient();
        self.cd0 + self.k1 * cl + self.k2 * cl * cl
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightState {
    pub altitude: f64,
    pub path_angle: f64,
    pub speed: f64,
    pub range: f64,
}

impl FlightState {
    pub fn from_slice(u: &[f64]) -> Self {
        Self {
            altitude: u[ALTITUDE],
            path_angle: u[PATH_ANGLE],
            speed: u[SPEED],
            range: u[RANGE],
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.altitude, self.path_angle, self.speed, self.range]
    }
}

fn density_base(altitude: f64) -> f64 {
    1.0 - LAPSE_RATE * altitude / T_SEA_LEVEL
}

/// Air density [kg/m^3]; defined below roughly 44.3 km.
pub fn air_density(altitude: f64) -> Result<f64, RhsError> {
    let base = density_base(altitude);
    if !(base > 0.0) {
        return Err(RhsError::DensityDomain { altitude });
    }
    Ok(RHO_SEA_LEVEL * base.powf(DENSITY_EXPONENT))
}

fn air_density_slope(altitude: f64) -> Result<f64, RhsError> {
    let base = density_base(altitude);
    if !(base > 0.0) {
        return Err(RhsError::DensityDomain { altitude });
    }
    Ok(
        -RHO_SEA_LEVEL * DENSITY_EXPONENT * base.powf(DENSITY_EXPONENT - 1.0) * LAPSE_RATE
            / T_SEA_LEVEL,
    )
}

fn dynamic_force(
    state: &FlightState,
    params: &FlightParams,
    coefficient: f64,
) -> Result<f64, RhsError> {
    let rho = air_density(state.altitude)?;
    Ok(0.5 * rho * state.speed * state.speed * coefficient * params.wing_area)
}

/// Lift [N].
pub fn lift(state: &FlightState, params: &FlightParams) -> Result<f64, RhsError> {
    dynamic_force(state, params, params.lift_coefficient())
}

/// Drag [N].
pub fn drag(state: &FlightState, params: &FlightParams) -> Result<f64, RhsError> {
    dynamic_force(state, params, params.drag_coefficient())
}

/// Point-mass climb dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlightModel {
    pub params: FlightParams,
}

impl FlightModel {
    pub fn new(params: FlightParams) -> Self {
        Self { params }
    }

    pub fn rhs_state(&self, state: &FlightState) -> Result<[f64; 4], RhsError> {
        let p = &self.params;
        let v = state.speed;
        if !(v >= MIN_SPEED) {
            return Err(RhsError::SpeedTooSmall {
                speed: v,
                min: MIN_SPEED,
            });
        }
        let (sg, cg) = state.path_angle.sin_cos();
        let (st, ct) = (p.angle_of_attack + p.thrust_offset).sin_cos();
        let l = lift(state, p)?;
        let d = drag(state, p)?;
        Ok([
            v * sg,
            (p.thrust * st + l) / (p.mass * v) - p.gravity / v * cg,
            (p.thrust * ct - d) / p.mass - p.gravity * sg,
            v * cg,
        ])
    }
}

impl OdeSystem for FlightModel {
    fn dimension(&self) -> usize {
        4
    }

    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<(), RhsError> {
        du.copy_from_slice(&self.rhs_state(&FlightState::from_slice(u))?);
        Ok(())
    }

    fn jacobian(&self, _t: f64, u: &[f64], jac: &mut Matrix) -> Option<Result<(), RhsError>> {
        Some(self.fill_jacobian(u, jac))
    }

    fn component_names(&self) -> Vec<String> {
        ["h", "gamma", "V", "x"].map(String::from).to_vec()
    }
}

impl FlightModel {
    fn fill_jacobian(&self, u: &[f64], jac: &mut Matrix) -> Result<(), RhsError> {
        let p = &self.params;
        let s = FlightState::from_slice(u);
        let v = s.speed;
        if !(v >= MIN_SPEED) {
            return Err(RhsError::SpeedTooSmall {
                speed: v,
                min: MIN_SPEED,
            });
        }
        let rho = air_density(s.altitude)?;
        let drho = air_density_slope(s.altitude)?;
        let (sg, cg) = s.path_angle.sin_cos();
        let fs = p.thrust * (p.angle_of_attack + p.thrust_offset).sin();
        let cl = p.lift_coefficient();
        let cd = p.drag_coefficient();
        let q = 0.5 * p.wing_area / p.mass;

        jac.fill(0.0);
        jac[(0, 1)] = v * cg;
        jac[(0, 2)] = sg;

        jac[(1, 0)] = q * drho * v * cl;
        jac[(1, 1)] = p.gravity * sg / v;
        jac[(1, 2)] = -fs / (p.mass * v * v) + q * rho * cl + p.gravity * cg / (v * v);

        jac[(2, 0)] = -q * drho * v * v * cd;
        jac[(2, 1)] = -p.gravity * cg;
        jac[(2, 2)] = -2.0 * q * rho * v * cd;

        jac[(3, 1)] = -v * sg;
        jac[(3, 2)] = cg;
        Ok(())
    }
}

/// Boundary conditions of the canonical climb: `h(0)`, `V(0)`, `x(0)` and
/// `h(t_f)` pinned, `gamma(0)` free.
pub fn climb_boundary_conditions() -> BoundaryConditions {
    BoundaryConditions::new(
        4,
        [(ALTITUDE, 0.0), (SPEED, CLIMB_INITIAL_SPEED), (RANGE, 0.0)],
        [(ALTITUDE, CLIMB_TARGET_ALTITUDE)],
    )
}

/// The canonical climb problem on `[0, 532]` s with `n_nodes` intervals.
/// The horizon is fixed; other horizons go through [`crate::BvpProblem::new`].
pub fn make_flight_problem(
    params: FlightParams,
    n_nodes: usize,
) -> Result<BvpProblem<FlightModel>> {
    params
        .validate()
        .map_err(crate::error::Error::InvalidParams)?;
    let grid = Grid::new(n_nodes, CLIMB_T_FINAL)?;
    BvpProblem::new(FlightModel::new(params), climb_boundary_conditions(), grid)
}
