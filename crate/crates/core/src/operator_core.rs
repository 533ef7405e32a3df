//! The nonlinear map 𝒢(u) = 1 + 𝒦u♯^ν − (𝒦u♯^ν)(0), its derivative at the
//! Lane-Emden profile, the remainder ω, and the resolvent (1 − D𝒢(θ))⁻¹.

use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector, Dyn, LU};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lane_emden::{pos_pow, LaneEmdenProfile};
use crate::potential::NewtonOperator;
use crate::spectral_grid::{positive_part, project, synthesize, Grid, GridFunction, ModeSet};

/// LU factors of one mode system and its condition number.
type ModeFactor = (LU<f64, Dyn, Dyn>, f64);

/// Condition number beyond which a mode system is reported as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Discrete 𝒢, D𝒢(θ) and ω on a fixed grid around a fixed profile.
#[derive(Debug, Clone)]
pub struct OperatorCore {
    profile: LaneEmdenProfile,
    grid: Arc<Grid>,
    newton: NewtonOperator,
    theta: GridFunction,
    /// Per mode, the N × n_int matrix of h_j(interior) ↦ (D𝒢(θ)h)_j.
    dg: Vec<DMatrix<f64>>,
}

impl OperatorCore {
    pub fn new(profile: &LaneEmdenProfile, grid: &Arc<Grid>) -> Self {
        let newton = NewtonOperator::new(grid);
        let rg = &grid.radial;
        let n = rg.len();
        let n_int = rg.n_interior();
        let nu = profile.nu;
        let weight: Vec<f64> = rg.nodes[..n_int]
            .iter()
            .map(|&r| nu * profile.theta_sharp_pow(r, nu - 1.0))
            .collect();
        let origin = newton.origin_weights();
        let dg = grid
            .angular
            .even_modes()
            .map(|j| {
                let w = newton.matrix(j);
                DMatrix::from_fn(n, n_int, |i, c| {
                    let g = if j == 0 {
                        w[(i, c)] - origin[c]
                    } else {
                        w[(i, c)]
                    };
                    g * weight[c]
                })
            })
            .collect();
        Self {
            profile: profile.clone(),
            grid: Arc::clone(grid),
            theta: GridFunction::from_radial(grid, |r| profile.eval_theta(r)),
            newton,
            dg,
        }
    }

    pub fn profile(&self) -> &LaneEmdenProfile {
        &self.profile
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn newton(&self) -> &NewtonOperator {
        &self.newton
    }

    /// θ sampled on the grid (harmonic continuation beyond ξ₁).
    pub fn theta(&self) -> &GridFunction {
        &self.theta
    }

    /// Legendre modes of u♯^ν.
    pub fn source_modes(&self, u: &GridFunction) -> ModeSet {
        let nu = self.profile.nu;
        project(&positive_part(u).map(|v| pos_pow(v, nu)))
    }

    /// 𝒢 evaluated from the source modes of u♯^ν.
    pub fn apply_g_from_source(&self, source: &ModeSet) -> GridFunction {
        let v = synthesize(&self.newton.apply_modes(source), &self.grid);
        let shift = 1.0 - self.newton.origin_value(source);
        v.map(|x| x + shift)
    }

    pub fn apply_g(&self, u: &GridFunction) -> GridFunction {
        self.apply_g_from_source(&self.source_modes(u))
    }

    /// D𝒢(θ)h, mode by mode.
    pub fn apply_dg_theta(&self, h: &GridFunction) -> GridFunction {
        let modes = project(h);
        synthesize(&self.apply_dg_modes(&modes), &self.grid)
    }

    fn apply_dg_modes(&self, h: &ModeSet) -> ModeSet {
        let n_int = self.grid.radial.n_interior();
        let modes = h
            .iter()
            .zip(&self.dg)
            .map(|((_, hj), d)| {
                let x = DVector::from_column_slice(&hj[..n_int]);
                (d * x).as_slice().to_vec()
            })
            .collect();
        ModeSet::from_modes(h.j_max, modes)
    }

    /// ω(h) = 𝒢(θ+h) − 𝒢(θ) − D𝒢(θ)h.
    pub fn omega(&self, h: &GridFunction) -> GridFunction {
        let g1 = self.apply_g(&self.theta.add(h));
        let g0 = self.apply_g(&self.theta);
        g1.sub(&g0).sub(&self.apply_dg_theta(h))
    }

    /// Factorizes 1 − D𝒢(θ) mode by mode on the nodes in [0, ξ₁].
    pub fn build_resolvent(&self) -> Result<ResolventFactorization> {
        let nu = self.profile.nu;
        if nu < 2.0 {
            warn!(
                "nu = {nu} is below 2: invertibility of 1 - DG(theta) is not covered by the theory"
            );
        } else if nu >= 5.0 {
            warn!("nu = {nu} is at least 5: no finite Lane-Emden radius");
        }
        let n_int = self.grid.radial.n_interior();
        let parts: Vec<Result<ModeFactor>> = self
            .dg
            .par_iter()
            .enumerate()
            .map(|(m, d)| {
                let sys = DMatrix::identity(n_int, n_int) - d.rows(0, n_int);
                let sv = sys.singular_values();
                let cond = sv.max() / sv.min();
                if !cond.is_finite() || cond > SINGULAR_CONDITION {
                    return Err(Error::SingularMode { j: 2 * m });
                }
                Ok((sys.lu(), cond))
            })
            .collect();
        let mut lus = Vec::with_capacity(parts.len());
        let mut condition_numbers = Vec::with_capacity(parts.len());
        for p in parts {
            let (lu, c) = p?;
            lus.push(lu);
            condition_numbers.push(c);
        }
        Ok(ResolventFactorization {
            grid: Arc::clone(&self.grid),
            dg: self.dg.clone(),
            lus,
            condition_numbers,
        })
    }
}

/// (1 − D𝒢(θ))⁻¹ as one LU factorization per even mode. Immutable and
/// reusable for every iteration on the same grid and profile.
#[derive(Debug, Clone)]
pub struct ResolventFactorization {
    grid: Arc<Grid>,
    dg: Vec<DMatrix<f64>>,
    lus: Vec<LU<f64, Dyn, Dyn>>,
    condition_numbers: Vec<f64>,
}

impl ResolventFactorization {
    /// 2-norm condition number of each mode system, in mode order.
    pub fn condition_numbers(&self) -> &[f64] {
        &self.condition_numbers
    }

    /// Solves (1 − D𝒢(θ))h = s. The interior mode values come from the
    /// factorized systems, everything else from h = s + D𝒢(θ)h.
    pub fn apply(&self, s: &GridFunction) -> GridFunction {
        let n_int = self.grid.radial.n_interior();
        let modes = project(s);
        let dh: Vec<Vec<f64>> = modes
            .iter()
            .zip(&self.lus)
            .zip(&self.dg)
            .map(|(((_, sj), lu), d)| {
                let rhs = DVector::from_column_slice(&sj[..n_int]);
                let h = lu.solve(&rhs).expect("factorization checked at build time");
                (d * h).as_slice().to_vec()
            })
            .collect();
        s.add(&synthesize(
            &ModeSet::from_modes(modes.j_max, dh),
            &self.grid,
        ))
    }
}

pub fn apply_g(core: &OperatorCore, u: &GridFunction) -> GridFunction {
    core.apply_g(u)
}

pub fn apply_dg_theta(core: &OperatorCore, h: &GridFunction) -> GridFunction {
    core.apply_dg_theta(h)
}

pub fn omega(core: &OperatorCore, h: &GridFunction) -> GridFunction {
    core.omega(h)
}

pub fn build_resolvent(core: &OperatorCore) -> Result<ResolventFactorization> {
    core.build_resolvent()
}

pub fn resolvent_apply(fact: &ResolventFactorization, s: &GridFunction) -> GridFunction {
    fact.apply(s)
}
