//! The free boundary r = Ξ₁(ζ) of a distorted solution and the quantities
//! read off it: slope, oblateness, normal derivative and the pole shape.

use std::f64::consts::PI;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::DistortedSolution;
use crate::roots::brent;

/// Relative root tolerance for Ξ₁.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceProfile {
    /// Radius ξ₁ of the spherical profile the solution perturbs.
    pub reference_radius: f64,
    pub zeta_samples: Vec<f64>,
    pub xi1_values: Vec<f64>,
    pub dxi1_dzeta: Vec<f64>,
    pub sigma: f64,
    pub normal_derivs: Vec<f64>,
}

/// Root of r ↦ Θ(r, ζ) in (ξ₁/2, 3ξ₁/2).
pub fn find_xi1(sol: &DistortedSolution, zeta: f64) -> Result<f64> {
    let xi1 = sol.profile().xi1;
    let (lo, hi) = (0.5 * xi1, 1.5 * xi1);
    let f = |r: f64| sol.eval_theta(r, zeta);
    if f(lo) * f(hi) >= 0.0 {
        return Err(Error::NoBracket { zeta, lo, hi });
    }
    let root = brent(f, lo, hi, ROOT_TOL * xi1).ok_or(Error::NoBracket { zeta, lo, hi })?;
    let (dr, _) = sol.eval_grad_theta(root, zeta);
    if dr.is_nan() || dr >= 0.0 {
        warn!("dTheta/dr = {dr} at the surface root for zeta = {zeta}; root may not be unique");
    }
    Ok(root)
}

/// dΞ₁/dζ = −(∂Θ/∂r)⁻¹ ∂Θ/∂ζ at (Ξ₁(ζ), ζ).
pub fn dxi1_dzeta(sol: &DistortedSolution, zeta: f64) -> Result<f64> {
    let r = find_xi1(sol, zeta)?;
    Ok(slope_at(sol, r, zeta))
}

fn slope_at(sol: &DistortedSolution, r: f64, zeta: f64) -> f64 {
    let (tr, tz) = sol.eval_grad_theta(r, zeta);
    -tz / tr
}

/// Outward normal derivative ∂Θ/∂N on the surface.
pub fn normal_derivative(sol: &DistortedSolution, zeta: f64) -> Result<f64> {
    let r = find_xi1(sol, zeta)?;
    Ok(normal_at(sol, r, zeta))
}

fn normal_at(sol: &DistortedSolution, r: f64, zeta: f64) -> f64 {
    let (tr, tz) = sol.eval_grad_theta(r, zeta);
    let d = -tz / tr;
    let q = (1.0 - zeta * zeta) / (r * r);
    (tr - q * d * tz) / (1.0 + q * d * d).sqrt()
}

/// Chebyshev-Lobatto points on [0, 1], including both ends.
pub fn chebyshev_zeta(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| match k {
            0 => 0.0,
            _ if k == n - 1 => 1.0,
            _ => 0.5 * (1.0 - (PI * k as f64 / m).cos()),
        })
        .collect()
}

pub fn surface_profile(sol: &DistortedSolution, n_samples: usize) -> Result<SurfaceProfile> {
    if n_samples < 3 {
        return Err(Error::Config(format!(
            "surface needs at least 3 samples (got {n_samples})"
        )));
    }
    let zeta_samples = chebyshev_zeta(n_samples);
    let rows: Vec<(f64, f64, f64)> = zeta_samples
        .par_iter()
        .map(|&z| {
            let r = find_xi1(sol, z)?;
            Ok((r, slope_at(sol, r, z), normal_at(sol, r, z)))
        })
        .collect::<Result<_>>()?;
    let xi1_values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut profile = SurfaceProfile {
        zeta_samples,
        dxi1_dzeta: rows.iter().map(|r| r.1).collect(),
        normal_derivs: rows.iter().map(|r| r.2).collect(),
        xi1_values,
        reference_radius: sol.profile().xi1,
        sigma: 0.0,
    };
    profile.sigma = oblateness(&profile)?;
    Ok(profile)
}

/// σ = (Ξ₁(0) − Ξ₁(1))/ξ₁.
pub fn oblateness(profile: &SurfaceProfile) -> Result<f64> {
    let at = |z: f64| {
        profile
            .zeta_samples
            .iter()
            .position(|&s| s == z)
            .map(|k| profile.xi1_values[k])
            .ok_or_else(|| Error::Config(format!("surface profile has no sample at zeta = {z}")))
    };
    Ok((at(0.0)? - at(1.0)?) / profile.reference_radius)
}

/// Shape of the surface near the pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleSlope {
    /// √(1−ζ²)·dΞ₁/dζ, which vanishes at the pole for a C¹ surface.
    pub proxy: f64,
    /// dZ/dϖ of the surface written as z = Z(ϖ).
    pub dz_dvarpi: f64,
    /// (1−ζ²)dΞ₁/dζ − ζΞ₁, which tends to −Ξ₁(1).
    pub denominator: f64,
}

pub fn pole_slope(sol: &DistortedSolution, zeta: f64) -> Result<PoleSlope> {
    let r = find_xi1(sol, zeta)?;
    let d = slope_at(sol, r, zeta);
    let s = (1.0 - zeta * zeta).sqrt();
    let denominator = (1.0 - zeta * zeta) * d - zeta * r;
    Ok(PoleSlope {
        proxy: s * d,
        dz_dvarpi: (zeta * s * d + s * r) / denominator,
        denominator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed_point::{Solver, SolverConfig};
    use crate::perturbation::frak_h;

    fn solve(eps: f64) -> DistortedSolution {
        Solver::new(&SolverConfig::default())
            .unwrap()
            .solve(eps)
            .unwrap()
    }

    #[test]
    fn spherical_case() {
        let sol = solve(0.0);
        let p = sol.profile().clone();
        let prof = surface_profile(&sol, 9).unwrap();
        assert_eq!(prof.sigma, 0.0);
        for (&x, &n) in prof.xi1_values.iter().zip(&prof.normal_derivs) {
            assert!((x - p.xi1).abs() < 1e-8);
            assert!((n + p.mu1 / (p.xi1 * p.xi1)).abs() < 1e-8);
        }
        assert!(pole_slope(&sol, 0.99).unwrap().proxy.abs() < 1e-12);
    }

    #[test]
    fn chebyshev_samples_are_nested() {
        let a = chebyshev_zeta(17);
        let b = chebyshev_zeta(33);
        assert_eq!((a[0], a[16]), (0.0, 1.0));
        for (k, &z) in a.iter().enumerate() {
            assert!((z - b[2 * k]).abs() < 1e-15);
        }
    }

    #[test]
    fn rotating_surface_shape() {
        let sol = solve(1e-3);
        let xi1 = sol.profile().xi1;
        let p17 = surface_profile(&sol, 17).unwrap();
        let p33 = surface_profile(&sol, 33).unwrap();
        for (k, &x) in p17.xi1_values.iter().enumerate() {
            assert!((x - p33.xi1_values[2 * k]).abs() <= 1e-8);
        }
        assert!(p17.sigma > 0.0);
        assert!(p17.xi1_values.windows(2).all(|w| w[1] < w[0]));
        assert!(p17.normal_derivs.iter().all(|&n| n < 0.0 && n.is_finite()));
        assert!(p17.xi1_values.iter().all(|&x| x > 0.0 && x < 2.0 * xi1));
        assert!(dxi1_dzeta(&sol, 0.0).unwrap().abs() < 1e-12);
        let delta = 1e-3 * xi1;
        for (&z, &x) in p17.zeta_samples.iter().zip(&p17.xi1_values) {
            assert!(sol.eval_theta(x - delta, z) > 0.0 && sol.eval_theta(x + delta, z) < 0.0);
            assert!(sol.eval_theta(x, z).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_matches_finite_differences() {
        let sol = solve(1e-3);
        for z in [0.2, 0.5, 0.8, 0.95] {
            let h = 1e-5;
            let fd = (find_xi1(&sol, z + h).unwrap() - find_xi1(&sol, z - h).unwrap()) / (2.0 * h);
            let d = dxi1_dzeta(&sol, z).unwrap();
            assert!((fd - d).abs() < 1e-6, "z={z} {fd} {d}");
        }
    }

    #[test]
    fn radial_slope_bound_near_surface() {
        let sol = solve(1e-3);
        let p = sol.profile();
        let kappa = (0..=100)
            .map(|k| p.eval_dtheta(p.xi1 * (0.5 + k as f64 / 100.0)).abs())
            .fold(f64::INFINITY, f64::min);
        for k in 0..=20 {
            let r = p.xi1 * (0.5 + k as f64 / 20.0);
            for z in [0.0, 0.5, 1.0] {
                assert!(sol.eval_grad_theta(r, z).0 <= -0.5 * kappa, "r={r} z={z}");
            }
        }
    }

    #[test]
    fn first_order_radius_shift() {
        let p = solve(0.0).profile().clone();
        let f = frak_h(&p).unwrap();
        let mismatch = |eps: f64, z: f64| {
            let sol = solve(eps);
            let pred = p.xi1 * p.xi1 / p.mu1 * f.eval(p.xi1, z) * eps;
            (find_xi1(&sol, z).unwrap() - p.xi1) / pred - 1.0
        };
        for z in [0.0, 0.5, 1.0] {
            let (m1, m2) = (mismatch(1e-3, z), mismatch(5e-4, z));
            assert!(m1.abs() < 0.15, "z={z} {m1}");
            let q = m2 / m1;
            assert!((0.4..=0.6).contains(&q), "z={z} {m1} {m2}");
        }
    }

    #[test]
    fn pole_regularity() {
        let sol = solve(1e-3);
        let mags: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&z| pole_slope(&sol, z).unwrap().proxy.abs())
            .collect();
        assert!(mags[0] > mags[1] && mags[1] > mags[2]);
        let near = pole_slope(&sol, 0.999999).unwrap();
        let top = find_xi1(&sol, 1.0).unwrap();
        assert!((near.denominator + top).abs() < 0.01 * top);
        assert!(near.dz_dvarpi.abs() < 0.01);
    }

    #[test]
    fn out_of_regime_eps_loses_bracket() {
        let sol = solve(8e-3);
        assert!(matches!(find_xi1(&sol, 0.0), Err(Error::NoBracket { .. })));
        assert!(surface_profile(&sol, 2).is_err());
    }
}
