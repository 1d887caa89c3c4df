//! Linear programs: a small model type, a dense simplex solver behind the
//! [`LpSolver`] trait, and the two benchmark LPs over allocation instances.

mod benchmark;
mod cache;
mod simplex;

use thiserror::Error;

pub use benchmark::{
    build_general_lp, build_homogeneous_lp, check_lp_bounds, normalize_homogeneous, solve,
    solve_with, BenchmarkLp, LpBoundsReport, LpKind, LpSolution, SolveStatus,
};
pub use cache::LpCache;
pub use simplex::DenseSimplex;

/// Primal feasibility tolerance for benchmark solutions.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse row: `(variable, coefficient)`.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `max objective . x` subject to `constraints` and `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        debug_assert!(terms.iter().all(|&(v, _)| v < self.n_vars));
        self.constraints.push(Constraint { terms, sense, rhs });
    }

    /// Largest violation of any constraint or sign restriction by `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let sign = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        self.constraints
            .iter()
            .map(|c| {
                let lhs: f64 = c.terms.iter().map(|&(v, a)| a * x[v]).sum();
                match c.sense {
                    Sense::Le => (lhs - c.rhs).max(0.0),
                    Sense::Ge => (c.rhs - lhs).max(0.0),
                }
            })
            .fold(sign, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("problem is unbounded")]
    Unbounded,
    #[error("problem is infeasible")]
    Infeasible,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    /// The origin is not feasible; this solver has no phase one.
    #[error("unsupported model: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Anything that can maximize a [`LinearProgram`].
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<PrimalSolution, LpError>;
}
