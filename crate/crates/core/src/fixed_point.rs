//! The contraction iteration for the rotating equilibrium Θ = θ + εw.

use std::sync::Arc;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lane_emden::{solve_lane_emden, LaneEmdenProfile};
use crate::operator_core::{OperatorCore, ResolventFactorization};
use crate::spectral_grid::{make_grids, sup_norm, Grid, GridFunction, ModeSet};

/// Every numerical knob of a distorted-profile solve. Field names double as
/// the keys of the JSON configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub nu: f64,
    pub j_max: usize,
    pub inner_panels: usize,
    pub outer_panels: usize,
    pub panel_order: usize,
    pub angular_order: usize,
    pub fp_tol: f64,
    pub max_iter: usize,
    pub r0_factor: f64,
    pub le_tol: f64,
    pub eps_list: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nu: 3.0,
            j_max: 8,
            inner_panels: 8,
            outer_panels: 4,
            panel_order: 16,
            angular_order: 32,
            fp_tol: 1e-10,
            max_iter: 50,
            r0_factor: 2.0,
            le_tol: 1e-12,
            eps_list: None,
        }
    }
}

impl SolverConfig {
    pub fn with_nu(nu: f64) -> Self {
        Self {
            nu,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !self.nu.is_finite() || self.nu < 1.0 {
            return Err(Error::InvalidIndex { nu: self.nu });
        }
        if self.fp_tol.is_nan() || self.fp_tol <= 0.0 {
            return fail(format!("fp_tol must be positive (got {})", self.fp_tol));
        }
        if self.max_iter == 0 {
            return fail("max_iter must be at least 1".into());
        }
        if !self.r0_factor.is_finite() || self.r0_factor < 2.0 {
            return fail(format!(
                "r0_factor must be at least 2 (got {})",
                self.r0_factor
            ));
        }
        if !self.j_max.is_multiple_of(2) {
            return fail(format!("j_max must be even (got {})", self.j_max));
        }
        if self.inner_panels == 0 || self.outer_panels == 0 || self.panel_order < 2 {
            return fail("panel counts must be positive and panel_order at least 2".into());
        }
        if self.angular_order < 2 || self.angular_order < 2 * self.j_max {
            return fail(format!(
                "angular_order must be at least max(2, 2*j_max) (got {})",
                self.angular_order
            ));
        }
        if let Some(eps) = &self.eps_list {
            if eps.iter().any(|e| !e.is_finite() || *e < 0.0) {
                return fail("eps_list entries must be finite and non-negative".into());
            }
        }
        Ok(())
    }
}

/// Centrifugal source 𝔤(r, ζ) = ¼(1−ζ²)r².
pub fn g_source(r: f64, zeta: f64) -> f64 {
    0.25 * (1.0 - zeta * zeta) * r * r
}

/// (∂𝔤/∂r, ∂𝔤/∂ζ).
pub fn g_source_grad(r: f64, zeta: f64) -> (f64, f64) {
    (0.5 * (1.0 - zeta * zeta) * r, -0.5 * zeta * r * r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    /// ‖w⁽ⁿ⁺¹⁾ − w⁽ⁿ⁾‖ for each iteration.
    pub diffs: Vec<f64>,
    /// diffs[n] / diffs[n−1].
    pub ratios: Vec<f64>,
    /// sup |Θ − ε𝔤 − 𝒢(Θ)| at the returned iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Everything a sequence of solves on one (ν, grid) pair can share: the
/// profile, the discrete operators, the resolvent and 𝔤 on the grid.
#[derive(Debug, Clone)]
pub struct Solver {
    pub config: SolverConfig,
    core: Arc<OperatorCore>,
    resolvent: Arc<ResolventFactorization>,
    g: GridFunction,
}

impl Solver {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let profile = solve_lane_emden(config.nu, config.le_tol)?;
        Self::with_profile(config, &profile)
    }

    pub fn with_profile(config: &SolverConfig, profile: &LaneEmdenProfile) -> Result<Self> {
        let grid = make_grids(config, profile.xi1)?;
        let core = OperatorCore::new(profile, &grid);
        let resolvent = core.build_resolvent()?;
        debug!(
            "resolvent condition numbers: {:?}",
            resolvent.condition_numbers()
        );
        Ok(Self {
            config: config.clone(),
            g: GridFunction::from_fn(&grid, g_source),
            core: Arc::new(core),
            resolvent: Arc::new(resolvent),
        })
    }

    pub fn core(&self) -> &Arc<OperatorCore> {
        &self.core
    }

    pub fn resolvent(&self) -> &ResolventFactorization {
        &self.resolvent
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.core.grid()
    }

    pub fn profile(&self) -> &LaneEmdenProfile {
        self.core.profile()
    }

    /// 𝔤 sampled on the grid.
    pub fn g(&self) -> &GridFunction {
        &self.g
    }

    /// The first-order response (1 − D𝒢(θ))⁻¹𝔤.
    pub fn first_order(&self) -> GridFunction {
        self.resolvent.apply(&self.g)
    }

    /// Iterates w ↦ (1 − D𝒢(θ))⁻¹(𝔤 + ω(εw)/ε) from w = 0.
    pub fn solve(&self, eps: f64) -> Result<DistortedSolution> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::Config(format!(
                "eps must be finite and non-negative (got {eps})"
            )));
        }
        let nu = self.config.nu;
        if !(2.0..5.0).contains(&nu) {
            warn!("nu = {nu} lies outside [2, 5): contraction is not guaranteed");
        }
        let mut w = GridFunction::zeros(self.grid());
        let mut diffs: Vec<f64> = Vec::new();
        let mut ratios = Vec::new();
        let mut above_one = 0;
        let mut converged = false;
        for n in 0..self.config.max_iter {
            let rhs = if eps == 0.0 {
                self.g.clone()
            } else {
                self.g
                    .add_scaled(1.0 / eps, &self.core.omega(&w.scale(eps)))
            };
            let next = self.resolvent.apply(&rhs);
            let diff = sup_norm(&next.sub(&w));
            w = next;
            if !diff.is_finite() {
                return Err(Error::NotContracting {
                    iteration: n + 1,
                    ratio: f64::NAN,
                });
            }
            if let Some(&prev) = diffs.last() {
                let ratio = diff / prev;
                ratios.push(ratio);
                above_one = if ratio > 1.0 { above_one + 1 } else { 0 };
                if above_one >= 2 {
                    return Err(Error::NotContracting {
                        iteration: n + 1,
                        ratio,
                    });
                }
            }
            diffs.push(diff);
            debug!("iteration {}: diff {diff:.3e}", n + 1);
            if eps == 0.0 || diff <= self.config.fp_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::MaxIterExceeded {
                max_iter: self.config.max_iter,
                last_diff: diffs.last().copied().unwrap_or(f64::NAN),
            });
        }
        let iterations = diffs.len();
        let mut sol = DistortedSolution::from_parts(
            self,
            eps,
            w,
            IterationReport {
                diffs,
                ratios,
                residual: f64::NAN,
                iterations,
                converged,
            },
        );
        sol.report.residual = sol.residual();
        Ok(sol)
    }
}

/// The distorted Lane-Emden function Θ = θ + εw on the grid, with the
/// source modes of Θ♯^ν for evaluation anywhere.
#[derive(Debug, Clone)]
pub struct DistortedSolution {
    pub nu: f64,
    pub eps: f64,
    pub config: SolverConfig,
    core: Arc<OperatorCore>,
    pub w: GridFunction,
    pub theta_source: ModeSet,
    pub report: IterationReport,
}

impl DistortedSolution {
    /// Assembles a solution from a perturbation `w` (e.g. loaded from disk).
    pub fn from_parts(solver: &Solver, eps: f64, w: GridFunction, report: IterationReport) -> Self {
        let theta = solver.core.theta().add_scaled(eps, &w);
        Self {
            nu: solver.config.nu,
            eps,
            config: solver.config.clone(),
            theta_source: solver.core.source_modes(&theta),
            core: Arc::clone(&solver.core),
            w,
            report,
        }
    }

    pub fn profile(&self) -> &LaneEmdenProfile {
        self.core.profile()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.core.grid()
    }

    /// Θ = θ + εw at the grid nodes.
    pub fn theta_grid(&self) -> GridFunction {
        self.core.theta().add_scaled(self.eps, &self.w)
    }

    /// sup |Θ − θ| = ε‖w‖.
    pub fn deviation(&self) -> f64 {
        self.eps * sup_norm(&self.w)
    }

    /// sup over nodes of |Θ − ε𝔤 − 𝒢(Θ)|.
    pub fn residual(&self) -> f64 {
        let theta = self.theta_grid();
        let g = GridFunction::from_fn(self.grid(), g_source);
        let rhs = g.scale(self.eps).add(&self.core.apply_g(&theta));
        sup_norm(&theta.sub(&rhs))
    }

    /// Θ(r, ζ) = ε𝔤 + 1 + 𝒦Θ♯^ν − (𝒦Θ♯^ν)(0), for any r ≥ 0.
    pub fn eval_theta(&self, r: f64, zeta: f64) -> f64 {
        let newton = self.core.newton();
        self.eps * g_source(r, zeta)
            + 1.0
            + crate::potential::eval_potential_at(newton, &self.theta_source, r, zeta)
            - newton.origin_value(&self.theta_source)
    }

    /// (∂Θ/∂r, ∂Θ/∂ζ) for r > 0.
    pub fn eval_grad_theta(&self, r: f64, zeta: f64) -> (f64, f64) {
        let (gr, gz) = g_source_grad(r, zeta);
        let (vr, vz) = crate::potential::eval_potential_grad_at(
            self.core.newton(),
            &self.theta_source,
            r,
            zeta,
        );
        (self.eps * gr + vr, self.eps * gz + vz)
    }
}

pub fn solve_distorted(config: &SolverConfig, eps: f64) -> Result<DistortedSolution> {
    Solver::new(config)?.solve(eps)
}

pub fn residual(sol: &DistortedSolution) -> f64 {
    sol.residual()
}

pub fn eval_theta(sol: &DistortedSolution, r: f64, zeta: f64) -> f64 {
    sol.eval_theta(r, zeta)
}

pub fn eval_grad_theta(sol: &DistortedSolution, r: f64, zeta: f64) -> (f64, f64) {
    sol.eval_grad_theta(r, zeta)
}
