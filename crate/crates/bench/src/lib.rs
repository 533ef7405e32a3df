//! Shared fixtures for the benchmarks.

use rotstar_core::{Solver, SolverConfig};

/// Default-grid solver at the given index.
pub fn solver(nu: f64) -> Solver {
    Solver::new(&SolverConfig::with_nu(nu)).expect("default configuration is valid")
}
