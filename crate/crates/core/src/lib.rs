//! Distorted Lane-Emden functions: slowly rotating axisymmetric polytropes.
//!
//! The rotating equilibrium is the fixed point `u = ε𝔤 + 𝒢(u)` on the
//! product grid `(r, ζ) ∈ [0, R₀] × [−1, 1]`, solved by contraction around
//! the spherical Lane-Emden profile.

pub mod error;
pub mod fixed_point;
pub mod lane_emden;
pub mod ode;
pub mod operator_core;
pub mod perturbation;
pub mod potential;
pub mod quadrature;
pub mod roots;
pub mod spectral_grid;
pub mod surface;

pub use error::{Error, Result};
pub use fixed_point::{DistortedSolution, IterationReport, Solver, SolverConfig};
pub use lane_emden::{solve_lane_emden, LaneEmdenProfile};
pub use operator_core::{OperatorCore, ResolventFactorization};
pub use perturbation::FirstOrder;
pub use spectral_grid::{Grid, GridFunction, ModeSet};
pub use surface::{PoleSlope, SurfaceProfile};
