//! Run configuration files.
//!
//! A config is a JSON object. `problem` is either a preset name or an inline
//! problem; every other key is optional and overrides the defaults. Unknown
//! keys are rejected.
//!
//! ```json
//! {
//!   "problem": {
//!     "system": { "kind": "oscillator", "omega": 1.0 },
//!     "t_final": 1.5707963267948966,
//!     "fixed_at_start": { "1": 0.0 },
//!     "fixed_at_end": { "1": 1.0 }
//!   },
//!   "n_nodes": 2000,
//!   "relax_k": 500,
//!   "free_start_defaults": { "2": 0.5 },
//!   "output": { "trajectory": "osc.csv", "report": "osc.json" }
//! }
//! ```
//!
//! Component keys are 1-based indices or component names (`"gamma"`).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use gml_bvp::flight::{self, FlightModel, FlightParams};
use gml_bvp::systems::{HarmonicOscillator, ScalarLinear, ZeroSystem};
use gml_bvp::{
    BoundaryConditions, BvpProblem, EndpointClosure, Grid, Integrator, OdeSystem, RelaxationParams,
    ShootingConfig, ShootingStart,
};
use serde::Deserialize;

use crate::CliError;

pub const PRESETS: [&str; 2] = ["a320-climb", "oscillator"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: serde_json::Value,
    pub n_nodes: Option<usize>,
    pub relax_k: Option<f64>,
    pub outer_tol: Option<f64>,
    pub max_outer_iter: Option<usize>,
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub anderson_depth: Option<usize>,
    pub endpoint_closure: Option<ClosureName>,
    #[serde(default)]
    pub free_start_defaults: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub oracle: OracleSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureName {
    Dropped,
    Lagged,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub trajectory: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub integrator: Option<String>,
    /// Sign-changing bracket for a single free start component.
    pub bracket: Option<[f64; 2]>,
    /// Newton starting point; defaults to the free start defaults.
    pub guess: Option<Vec<f64>>,
    pub root_tol: Option<f64>,
    pub max_root_iter: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    pub system: SystemSpec,
    pub t_final: f64,
    #[serde(default)]
    pub fixed_at_start: BTreeMap<String, f64>,
    #[serde(default)]
    pub fixed_at_end: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Zero {
        dimension: usize,
    },
    ScalarLinear {
        slope: f64,
        offset: f64,
    },
    Oscillator {
        #[serde(default = "unit")]
        omega: f64,
    },
    Flight(FlightSpec),
}

fn unit() -> f64 {
    1.0
}

/// Overrides of the default flight parameters.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightSpec {
    pub mass: Option<f64>,
    pub wing_area: Option<f64>,
    pub angle_of_attack: Option<f64>,
    pub thrust_offset: Option<f64>,
    pub gravity: Option<f64>,
    pub cd0: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub cl_alpha: Option<f64>,
    pub thrust: Option<f64>,
}

impl FlightSpec {
    pub fn params(&self) -> FlightParams {
        let d = FlightParams::default();
        FlightParams {
            mass: self.mass.unwrap_or(d.mass),
            wing_area: self.wing_area.unwrap_or(d.wing_area),
            angle_of_attack: self.angle_of_attack.unwrap_or(d.angle_of_attack),
            thrust_offset: self.thrust_offset.unwrap_or(d.thrust_offset),
            gravity: self.gravity.unwrap_or(d.gravity),
            cd0: self.cd0.unwrap_or(d.cd0),
            k1: self.k1.unwrap_or(d.k1),
            k2: self.k2.unwrap_or(d.k2),
            cl_alpha: self.cl_alpha.unwrap_or(d.cl_alpha),
            thrust: self.thrust.unwrap_or(d.thrust),
        }
    }
}

/// A config resolved into a problem and solver settings.
pub struct Resolved {
    pub problem: BvpProblem<Box<dyn OdeSystem>>,
    pub params: RelaxationParams,
    /// 0-based component index to default start value.
    pub free_start_defaults: BTreeMap<usize, f64>,
    pub output: OutputPaths,
    pub oracle: OracleSpec,
}

struct Defaults {
    n_nodes: usize,
    relax_k: f64,
    free_start_defaults: BTreeMap<usize, f64>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let (system, t_final, start, end, defaults) = match &self.problem {
            serde_json::Value::String(name) => preset(name)?,
            value => {
                let inline: InlineProblem = serde_json::from_value(value.clone())
                    .map_err(|e| CliError::Config(format!("problem: {e}")))?;
                let system = inline.system.build()?;
                let names = system.component_names();
                let start = component_map(&inline.fixed_at_start, &names, "fixed_at_start")?;
                let end = component_map(&inline.fixed_at_end, &names, "fixed_at_end")?;
                let defaults = Defaults {
                    n_nodes: 1000,
                    relax_k: RelaxationParams::default().relax_k,
                    free_start_defaults: BTreeMap::new(),
                };
                (system, inline.t_final, start, end, defaults)
            }
        };
        let names = system.component_names();
        let mut free_start_defaults = defaults.free_start_defaults;
        free_start_defaults.extend(component_map(
            &self.free_start_defaults,
            &names,
            "free_start_defaults",
        )?);

        let grid = Grid::new(self.n_nodes.unwrap_or(defaults.n_nodes), t_final)?;
        let bc = BoundaryConditions::new(system.dimension(), start, end);
        let problem = BvpProblem::new(system, bc, grid)?;

        let base = RelaxationParams::default();
        let params = RelaxationParams {
            relax_k: self.relax_k.unwrap_or(defaults.relax_k),
            outer_tol: self.outer_tol.unwrap_or(base.outer_tol),
            max_outer_iter: self.max_outer_iter.unwrap_or(base.max_outer_iter),
            newton_tol: self.newton_tol.unwrap_or(base.newton_tol),
            newton_max_iter: self.newton_max_iter.unwrap_or(base.newton_max_iter),
            anderson_depth: self.anderson_depth.unwrap_or(base.anderson_depth),
            endpoint_closure: match self.endpoint_closure {
                Some(ClosureName::Dropped) => EndpointClosure::Dropped,
                Some(ClosureName::Lagged) => EndpointClosure::Lagged,
                None => base.endpoint_closure,
            },
            divergence_limit: base.divergence_limit,
        };
        params.validate()?;

        Ok(Resolved {
            problem,
            params,
            free_start_defaults,
            output: self.output.clone(),
            oracle: self.oracle.clone(),
        })
    }
}

impl Resolved {
    /// Shooting settings; `integrator` overrides the config value.
    pub fn shooting_config(
        &self,
        integrator: Option<Integrator>,
    ) -> Result<ShootingConfig, CliError> {
        let integrator = match (integrator, &self.oracle.integrator) {
            (Some(i), _) => i,
            (None, Some(name)) => name.parse().map_err(CliError::Config)?,
            (None, None) => Integrator::Euler,
        };
        let start = match (&self.oracle.bracket, &self.oracle.guess) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "oracle: give either bracket or guess, not both".into(),
                ))
            }
            (Some([lo, hi]), None) => ShootingStart::Bracket { lo: *lo, hi: *hi },
            (None, Some(g)) => ShootingStart::Guess(g.clone()),
            (None, None) => ShootingStart::Guess(
                self.problem
                    .bc()
                    .free_at_start()
                    .into_iter()
                    .map(|j| self.free_start_defaults.get(&j).copied().unwrap_or(0.0))
                    .collect(),
            ),
        };
        Ok(ShootingConfig {
            integrator,
            root_tol: self.oracle.root_tol.unwrap_or(1e-10),
            max_root_iter: self.oracle.max_root_iter.unwrap_or(100),
            start,
        })
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<Box<dyn OdeSystem>, CliError> {
        Ok(match self {
            SystemSpec::Zero { dimension } => {
                if *dimension == 0 {
                    return Err(CliError::Config("zero system needs dimension >= 1".into()));
                }
                Box::new(ZeroSystem {
                    dimension: *dimension,
                })
            }
            SystemSpec::ScalarLinear { slope, offset } => Box::new(ScalarLinear {
                slope: *slope,
                offset: *offset,
            }),
            SystemSpec::Oscillator { omega } => Box::new(HarmonicOscillator { omega: *omega }),
            SystemSpec::Flight(spec) => {
                let params = spec.params();
                params.validate().map_err(CliError::Config)?;
                Box::new(FlightModel { params })
            }
        })
    }
}

type PresetParts = (
    Box<dyn OdeSystem>,
    f64,
    BTreeMap<usize, f64>,
    BTreeMap<usize, f64>,
    Defaults,
);

fn preset(name: &str) -> Result<PresetParts, CliError> {
    match name {
        "a320-climb" => {
            let bc = flight::climb_boundary_conditions();
            Ok((
                Box::new(FlightModel::default()),
                flight::CLIMB_T_FINAL,
                bc.fixed_at_start,
                bc.fixed_at_end,
                Defaults {
                    n_nodes: flight::CLIMB_N_NODES,
                    relax_k: 509.0,
                    free_start_defaults: BTreeMap::from([(
                        flight::PATH_ANGLE,
                        flight::CLIMB_GAMMA_GUESS,
                    )]),
                },
            ))
        }
        "oscillator" => Ok((
            Box::new(HarmonicOscillator::default()),
            FRAC_PI_2,
            BTreeMap::from([(0, 0.0)]),
            BTreeMap::from([(0, 1.0)]),
            Defaults {
                n_nodes: 2000,
                relax_k: 500.0,
                free_start_defaults: BTreeMap::new(),
            },
        )),
        other => Err(CliError::Config(format!(
            "unknown preset `{other}` (expected one of {})",
            PRESETS.join(", ")
        ))),
    }
}

/// Maps 1-based or named component keys to 0-based indices.
fn component_map(
    raw: &BTreeMap<String, f64>,
    names: &[String],
    field: &str,
) -> Result<BTreeMap<usize, f64>, CliError> {
    raw.iter()
        .map(|(key, &value)| {
            let index = match key.parse::<usize>() {
                Ok(label) if (1..=names.len()).contains(&label) => label - 1,
                Ok(label) => {
                    return Err(CliError::Config(format!(
                        "{field}: component {label} outside 1..={}",
                        names.len()
                    )))
                }
                Err(_) => names.iter().position(|n| n == key).ok_or_else(|| {
                    CliError::Config(format!(
                        "{field}: unknown component `{key}` (known: {})",
                        names.join(", ")
                    ))
                })?,
            };
            Ok((index, value))
        })
        .collect()
}
