//! Interior-point solvers for the two convex problem shapes used by the
//! reflect-beamforming algorithms:
//!
//! * [`qcqp`]: maximization of a sum of concave quadratics and logarithms of
//!   concave quadratics over a complex vector, subject to convex quadratic
//!   constraints and per-entry modulus bounds. Solved with a log-barrier
//!   method and damped Newton steps in the real representation of the
//!   decision vector.
//! * [`sdp`]: linear programs over the complex Hermitian PSD cone (plus a
//!   nonnegative orthant for scalar variables and slacks). Solved with an
//!   infeasible-start primal-dual path-following method using the HKM
//!   search direction and a Mehrotra predictor-corrector.
//!
//! Both solvers report failures through [`SolveStatus`] rather than errors;
//! the only `Err` cases are malformed inputs.

pub mod linalg;
pub mod qcqp;
pub mod sdp;

use serde::{Deserialize, Serialize};

pub use num_complex::Complex64 as C64;
pub use qcqp::{
    solve_qcqp, ConcaveQuadratic, ConvexQuadraticProgram, ObjectiveTerm, QcqpOptions,
    QuadraticConstraint,
};
pub use sdp::{
    solve_sdp, ConstraintMatrix, SdpConstraint, SdpOptions, SdpSolution, SemidefiniteProgram,
    Sense,
};

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIters,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_optimal(self) -> bool {
        self == SolveStatus::Optimal
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a solve: status, best available solution and its objective.
#[derive(Debug, Clone)]
pub struct SolverOutcome<S> {
    pub status: SolveStatus,
    pub solution: S,
    /// Objective in the caller's units and sense (maximized value for QCQPs,
    /// minimized value for SDPs).
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    Invalid(String),
}
