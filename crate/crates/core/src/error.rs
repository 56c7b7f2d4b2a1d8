use thiserror::Error;

/// Failure raised by a right-hand-side evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RhsError {
    #[error("speed {speed} m/s is below the minimum {min} m/s")]
    SpeedTooSmall { speed: f64, min: f64 },
    #[error("altitude {altitude} m is outside the density model domain")]
    DensityDomain { altitude: f64 },
    #[error("{0}")]
    Domain(String),
}

/// Why a boundary-condition set cannot define a well-posed problem.
/// Component labels in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundaryError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("component u{label} is out of range for dimension {dimension}")]
    IndexOutOfRange { label: usize, dimension: usize },
    #[error("under-determined: {conditions} conditions for dimension {dimension}")]
    UnderDetermined { conditions: usize, dimension: usize },
    #[error("over-determined: {conditions} conditions for dimension {dimension}")]
    OverDetermined { conditions: usize, dimension: usize },
    #[error("boundary value for u{label} is not finite")]
    NonFiniteValue { label: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: n_nodes = {n_nodes} (need >= 2), t_final = {t_final} (need > 0)")]
    InvalidGrid { n_nodes: usize, t_final: f64 },
    #[error("invalid boundary conditions: {0}")]
    Boundary(#[from] BoundaryError),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("trajectory must have {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("non-finite value in trajectory at node {node}, component u{label}")]
    NonFiniteTrajectory { node: usize, label: usize },
    #[error("function evaluation produced a non-finite value in component {component}")]
    NonFiniteEvaluation { component: usize },
    #[error("right-hand side failed{}: {source}", node_context(*.node))]
    Rhs {
        node: Option<usize>,
        #[source]
        source: RhsError,
    },
    #[error("singular matrix: pivot {pivot:e} in column {column} is below {threshold:e}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("Newton iteration stopped after {iterations} iterations with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("endpoint system failed at unknowns {unknowns:?}: {source}")]
    Endpoint {
        unknowns: Vec<f64>,
        #[source]
        source: Box<Error>,
    },
    #[error("backward sweep failed at node {node}: {source}")]
    Sweep {
        node: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("outer iteration diverged at iteration {iteration}: update norm {update_norm:e}")]
    Divergence { iteration: usize, update_norm: f64 },
    #[error("bracket [{lo}, {hi}] gives mismatches {f_lo:e} and {f_hi:e} with no sign change")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("shooting needs {expected} initial values, got {found}")]
    ShootingSetup { expected: usize, found: usize },
}

fn node_context(node: Option<usize>) -> String {
    match node {
        Some(k) => format!(" at node {k}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn rhs_at(node: usize) -> impl Fn(RhsError) -> Error {
        move |source| Error::Rhs {
            node: Some(node),
            source,
        }
    }
}

impl From<RhsError> for Error {
    fn from(source: RhsError) -> Self {
        Error::Rhs { node: None, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
