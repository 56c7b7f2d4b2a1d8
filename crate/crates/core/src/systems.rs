//! Small reference systems with known behaviour, used by tests, benchmarks
//! and the CLI registry.

use crate::error::RhsError;
use crate::newton::Matrix;
use crate::types::OdeSystem;

/// `f(u) = 0` in any dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSystem {
    pub dimension: usize,
}

impl OdeSystem for ZeroSystem {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn rhs(&self, _t: f64, _u: &[f64], du: &mut [f64]) -> Result<(), RhsError> {
        du.fill(0.0);
        Ok(())
    }

    fn jacobian(&self, _t: f64, _u: &[f64], jac: &mut Matrix) -> Option<Result<(), RhsError>> {
        jac.fill(0.0);
        Some(Ok(()))
    }
}

/// Scalar `f(u) = slope * u + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLinear {
    pub slope: f64,
    pub offset: f64,
}

impl OdeSystem for ScalarLinear {
    fn dimension(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<(), RhsError> {
        du[0] = self.slope * u[0] + self.offset;
        Ok(())
    }

    fn jacobian(&self, _t: f64, _u: &[f64], jac: &mut Matrix) -> Option<Result<(), RhsError>> {
        jac[(0, 0)] = self.slope;
        Some(Ok(()))
    }
}

/// `u1' = omega u2`, `u2' = -omega u1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicOscillator {
    pub omega: f64,
}

impl Default for HarmonicOscillator {
    fn default() -> Self {
        Self { omega: 1.0 }
    }
}

impl OdeSystem for HarmonicOscillator {
    fn dimension(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<(), RhsError> {
        du[0] = self.omega * u[1];
        du[1] = -self.omega * u[0];
        Ok(())
    }

    fn jacobian(&self, _t: f64, _u: &[f64], jac: &mut Matrix) -> Option<Result<(), RhsError>> {
        jac.fill(0.0);
        jac[(0, 1)] = self.omega;
        jac[(1, 0)] = -self.omega;
        Some(Ok(()))
    }
}
