//! The Lane-Emden profile θ(r; ν), its first zero ξ₁, the harmonic
//! continuation beyond ξ₁, and scalar diagnostics built on it.

use crate::error::{Error, Result};
use crate::ode::{DenseTrajectory, Dopri5, StepControl};
use crate::quadrature::{adaptive_integrate, GaussRule};
use crate::roots::{brent, golden_max};

/// Radius at which integration leaves the series expansion.
pub const SEED_RADIUS: f64 = 1e-3;

/// Default search limit for the first zero. ξ₁(4.9) ≈ 171, so this
/// separates finite and infinite cases for every ν < 4.95.
pub const DEFAULT_R_MAX: f64 = 1000.0;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Positive part raised to a power, with an exact zero at the boundary.
#[inline]
pub fn pos_pow(x: f64, p: f64) -> f64 {
    if x > 0.0 {
        x.powf(p)
    } else if p == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Series θ = 1 − r²/6 + νr⁴/120 − ν(8ν−5)r⁶/15120 and its derivative.
fn series(nu: f64, r: f64) -> [f64; 2] {
    let r2 = r * r;
    let c6 = -nu * (8.0 * nu - 5.0) / 15120.0;
    let theta = 1.0 + r2 * (-1.0 / 6.0 + r2 * (nu / 120.0 + r2 * c6));
    let dtheta = r * (-1.0 / 3.0 + r2 * (nu / 30.0 + r2 * 6.0 * c6));
    [theta, dtheta]
}

fn rhs(nu: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + Copy {
    move |r, y| [y[1], -2.0 * y[1] / r - pos_pow(y[0], nu)]
}

/// Local error control tight enough that the accumulated error in ξ₁ and
/// μ₁ stays within `tol`.
fn step_control(tol: f64) -> StepControl {
    StepControl::with_tol((tol / 50.0).max(1e-15))
}

fn check_args(nu: f64, tol: f64) -> Result<()> {
    if !nu.is_finite() || nu < 1.0 {
        return Err(Error::InvalidIndex { nu });
    }
    if !(1e-14..=1e-4).contains(&tol) {
        return Err(Error::InvalidTolerance { tol });
    }
    Ok(())
}

/// Dense solution of the Lane-Emden equation on `[0, r_end]` with no
/// stopping at the first zero (θ♯ is used past it). Used for ν ≥ 5, where
/// no zero exists.
#[derive(Debug, Clone)]
pub struct LaneEmdenTrajectory {
    pub nu: f64,
    traj: DenseTrajectory<2>,
}

impl LaneEmdenTrajectory {
    pub fn r_end(&self) -> f64 {
        self.traj.t_end()
    }

    /// `(θ, dθ/dr)` at `r` in `[0, r_end]`.
    pub fn eval(&self, r: f64) -> [f64; 2] {
        if r <= SEED_RADIUS {
            series(self.nu, r)
        } else {
            self.traj.eval(r)
        }
    }
}

pub fn integrate_lane_emden(nu: f64, tol: f64, r_end: f64) -> Result<LaneEmdenTrajectory> {
    check_args(nu, tol)?;
    let traj = crate::ode::integrate(
        rhs(nu),
        SEED_RADIUS,
        series(nu, SEED_RADIUS),
        r_end,
        step_control(tol),
    )
    .map_err(|_| Error::StepSizeUnderflow { r: r_end })?;
    Ok(LaneEmdenTrajectory { nu, traj })
}

/// The radial Lane-Emden solution up to its first zero, extended
/// harmonically beyond it. Immutable after construction.
#[derive(Debug, Clone)]
pub struct LaneEmdenProfile {
    pub nu: f64,
    pub xi1: f64,
    pub mu1: f64,
    pub tol: f64,
    interior: DenseTrajectory<2>,
}

pub fn solve_lane_emden(nu: f64, tol: f64) -> Result<LaneEmdenProfile> {
    solve_lane_emden_with_limit(nu, tol, DEFAULT_R_MAX)
}

pub fn solve_lane_emden_with_limit(nu: f64, tol: f64, r_max: f64) -> Result<LaneEmdenProfile> {
    check_args(nu, tol)?;
    let f = rhs(nu);
    let ctl = step_control(tol);
    let mut stepper = Dopri5::new(f, SEED_RADIUS, series(nu, SEED_RADIUS), ctl);
    let mut segments = Vec::new();
    loop {
        if stepper.t() >= r_max {
            return Err(Error::NoFiniteZero { r_max });
        }
        let seg = stepper
            .step(r_max)
            .map_err(|_| Error::StepSizeUnderflow { r: stepper.t() })?;
        if seg.end()[0] > 0.0 {
            segments.push(seg);
            continue;
        }
        // Sign change inside this step: locate it on the dense output, then
        // redo the step so that it lands exactly on the zero.
        let (t0, y0) = (seg.t0, seg.start());
        let mut xi =
            brent(|r| seg.eval(r)[0], t0, seg.t1(), 1e-15 * seg.t1()).unwrap_or_else(|| seg.t1());
        let mut landing = seg;
        for _ in 0..8 {
            let trial = Dopri5::new(f, t0, y0, ctl);
            let (s, y_end, ..) = trial.attempt(xi - t0);
            landing = s;
            let correction = y_end[0] / y_end[1];
            xi -= correction;
            if correction.abs() <= 4.0 * f64::EPSILON * xi {
                break;
            }
        }
        let xi1 = landing.t1();
        let dtheta = landing.end()[1];
        segments.push(landing);
        return Ok(LaneEmdenProfile {
            nu,
            xi1,
            mu1: -xi1 * xi1 * dtheta,
            tol,
            interior: DenseTrajectory::new(segments),
        });
    }
}

impl LaneEmdenProfile {
    pub fn breakpoints(&self) -> Vec<f64> {
        self.interior.breakpoints()
    }

    /// θ(r), continued by −μ₁(1/ξ₁ − 1/r) for r > ξ₁.
    pub fn eval_theta(&self, r: f64) -> f64 {
        if r <= SEED_RADIUS {
            series(self.nu, r)[0]
        } else if r <= self.xi1 {
            self.interior.eval(r)[0]
        } else {
            -self.mu1 * (1.0 / self.xi1 - 1.0 / r)
        }
    }

    pub fn eval_dtheta(&self, r: f64) -> f64 {
        if r <= SEED_RADIUS {
            series(self.nu, r)[1]
        } else if r <= self.xi1 {
            self.interior.eval(r)[1]
        } else {
            -self.mu1 / (r * r)
        }
    }

    /// θ♯(r)^p with θ♯ = max(θ, 0).
    pub fn theta_sharp_pow(&self, r: f64, p: f64) -> f64 {
        if r >= self.xi1 {
            return if p == 0.0 { 1.0 } else { 0.0 };
        }
        pos_pow(self.eval_theta(r), p)
    }

    /// ∫ₐᵇ θ♯^ν r² dr, Gauss rule on each integration step.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let rule = GaussRule::new(12);
        let b = b.min(self.xi1);
        if b <= a {
            return 0.0;
        }
        let mut breaks: Vec<f64> = std::iter::once(a)
            .chain(self.breakpoints().into_iter().filter(|&t| t > a && t < b))
            .collect();
        breaks.push(b);
        let f = |r: f64| self.theta_sharp_pow(r, self.nu) * r * r;
        let n = breaks.len() - 1;
        breaks
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                // θ^ν has an algebraic endpoint singularity at ξ₁ for non-integer ν.
                if k + 1 == n && b == self.xi1 {
                    adaptive_integrate(&f, w[0], w[1], 1e-16)
                } else {
                    rule.integrate(w[0], w[1], f)
                }
            })
            .sum()
    }

    /// Supremum of ν θ^{ν−1} r² over [0, ξ₁] and its maximizer.
    pub fn kovetz_sup(&self) -> (f64, f64) {
        let nu = self.nu;
        let g = |r: f64| nu * self.theta_sharp_pow(r, nu - 1.0) * r * r;
        scan_then_golden(g, 0.0, self.xi1)
    }

    /// f(r) = −r θ'(r)/θ(r) on [0, ξ₁).
    pub fn milne_ratio(&self, r: f64) -> Result<f64> {
        if !(0.0..self.xi1).contains(&r) {
            return Err(Error::OutOfDomain { r, limit: self.xi1 });
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(-r * self.eval_dtheta(r) / self.eval_theta(r))
    }

    /// Relative mismatch between the two sides of the integral identity
    /// evaluated at the maximizer r₁ of θ^{ν−1} r²:
    ///
    /// ∫₀^{r₁} θ^ν r² = r₁³θ^ν(r₁)/3 + (ν/6)(2/(ν−1))² θ(r₁) r₁ + (ν/6) Q,
    /// Q = ∫₀^{r₁} (rθ' + θ)/(θ² r²) · (∫₀^r θ^ν s² ds)² dr.
    ///
    /// Both sides use adaptive quadrature; the inner mass integral is nested.
    pub fn q_identity_residual(&self) -> f64 {
        let nu = self.nu;
        let (_, r1) = self.kovetz_sup();
        let tol = 1e-13;
        let mass = |r: f64| {
            adaptive_integrate(
                &|s: f64| pos_pow(self.eval_theta(s), nu) * s * s,
                0.0,
                r,
                tol,
            )
        };
        let lhs = mass(r1);
        let q = adaptive_integrate(
            &|r: f64| {
                let th = self.eval_theta(r);
                let m = mass(r);
                (r * self.eval_dtheta(r) + th) / (th * th * r * r) * m * m
            },
            0.0,
            r1,
            tol,
        );
        let th1 = self.eval_theta(r1);
        let k = 2.0 / (nu - 1.0);
        let rhs = r1.powi(3) * pos_pow(th1, nu) / 3.0 + nu / 6.0 * k * k * th1 * r1 + nu / 6.0 * q;
        ((lhs - rhs) / lhs).abs()
    }
}

/// Kovetz supremum over `[0, r_end]` of a trajectory without a finite zero.
pub fn kovetz_sup_trajectory(traj: &LaneEmdenTrajectory) -> (f64, f64) {
    let nu = traj.nu;
    scan_then_golden(
        |r| nu * pos_pow(traj.eval(r)[0], nu - 1.0) * r * r,
        0.0,
        traj.r_end(),
    )
}

/// Returns `(max, argmax)`.
fn scan_then_golden<G: Fn(f64) -> f64>(g: G, a: f64, b: f64) -> (f64, f64) {
    const SCAN: usize = 2000;
    let step = (b - a) / SCAN as f64;
    let (k_best, _) =
        (0..=SCAN)
            .map(|k| (k, g(a + step * k as f64)))
            .fold(
                (0, f64::NEG_INFINITY),
                |best, c| if c.1 > best.1 { c } else { best },
            );
    let lo = a + step * k_best.saturating_sub(1) as f64;
    let hi = (a + step * (k_best + 1) as f64).min(b);
    let (x, v) = golden_max(&g, lo, hi, 1e-9);
    (v, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn series_satisfies_initial_conditions() {
        let p = solve_lane_emden(3.0, 1e-10).unwrap();
        assert_eq!(p.eval_theta(0.0), 1.0);
        assert_eq!(p.eval_dtheta(0.0), 0.0);
    }

    #[test]
    fn rejects_index_below_one_and_bad_tolerance() {
        assert!(matches!(
            solve_lane_emden(0.5, 1e-10),
            Err(Error::InvalidIndex { .. })
        ));
        assert!(matches!(
            solve_lane_emden(3.0, 1e-2),
            Err(Error::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn nu_one_matches_sinc() {
        let p = solve_lane_emden(1.0, 1e-10).unwrap();
        assert!((p.xi1 - PI).abs() < 1e-8);
        assert!((p.mu1 - PI).abs() < 1e-8);
        let d = p.eval_dtheta(PI / 2.0);
        assert!((d + 4.0 / (PI * PI)).abs() < 1e-9);
        assert!((p.milne_ratio(PI / 2.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn extension_is_harmonic_and_c1() {
        let p = solve_lane_emden(3.0, 1e-12).unwrap();
        assert!(p.eval_theta(p.xi1).abs() < 1e-12);
        assert!((p.eval_dtheta(p.xi1) + p.mu1 / p.xi1.powi(2)).abs() < 1e-12);
        let x = 2.0 * p.xi1;
        assert!((p.eval_theta(x) + p.mu1 / (2.0 * p.xi1)).abs() < 1e-14);
        // Continuity across the boundary from both sides.
        let d = 1e-7;
        assert!((p.eval_theta(p.xi1 - d) - p.eval_theta(p.xi1 + d)).abs() < 1e-8);
        // Laplacian by finite differences vanishes outside.
        for &r in &[1.2 * p.xi1, 1.5 * p.xi1, 3.0 * p.xi1] {
            let h = 1e-3;
            let f = |s: f64| s * s * p.eval_dtheta(s);
            let lap = (f(r + h) - f(r - h)) / (2.0 * h) / (r * r);
            assert!(lap.abs() < 1e-6, "r={r} lap={lap}");
        }
    }

    #[test]
    fn milne_ratio_out_of_domain() {
        let p = solve_lane_emden(2.0, 1e-10).unwrap();
        assert_eq!(p.milne_ratio(0.0).unwrap(), 0.0);
        assert!(matches!(
            p.milne_ratio(p.xi1),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn nu_five_has_no_finite_zero() {
        assert!(matches!(
            solve_lane_emden_with_limit(5.0, 1e-10, 100.0),
            Err(Error::NoFiniteZero { .. })
        ));
    }

    /// Classical RK4 from a two-term series start, stopping at the first sign
    /// change of θ, which is located by linear interpolation.
    fn rk4_first_zero(nu: f64, h: f64) -> (f64, f64) {
        let f = |r: f64, y: [f64; 2]| [y[1], -y[0].max(0.0).powf(nu) - 2.0 * y[1] / r];
        let mut r: f64 = 1e-4;
        let mut y = [
            1.0 - r * r / 6.0 + nu * r.powi(4) / 120.0,
            -r / 3.0 + nu * r.powi(3) / 30.0,
        ];
        loop {
            let k1 = f(r, y);
            let k2 = f(
                r + h / 2.0,
                [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]],
            );
            let k3 = f(
                r + h / 2.0,
                [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]],
            );
            let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            let next = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if next[0] <= 0.0 {
                let t = y[0] / (y[0] - next[0]);
                let xi = r + t * h;
                let dtheta = y[1] + t * (next[1] - y[1]);
                return (xi, -xi * xi * dtheta);
            }
            r += h;
            y = next;
        }
    }

    #[test]
    fn first_zero_matches_rk4() {
        for nu in [1.5, 2.0, 3.0, 4.0] {
            let p = solve_lane_emden(nu, 1e-12).unwrap();
            let (xi, mu) = rk4_first_zero(nu, 2e-4);
            assert!((p.xi1 - xi).abs() < 1e-6, "nu={nu} {} {xi}", p.xi1);
            assert!((p.mu1 - mu).abs() < 1e-6, "nu={nu} {} {mu}", p.mu1);
        }
    }

    #[test]
    fn known_radii() {
        for (nu, xi1, mu1) in [
            (3.0, 6.896_848_619, 2.018_235_951),
            (1.5, 3.653_753_736, 2.714_055_120),
        ] {
            let p = solve_lane_emden(nu, 1e-12).unwrap();
            assert!((p.xi1 - xi1).abs() < 1e-8, "{}", p.xi1);
            assert!((p.mu1 - mu1).abs() < 1e-8, "{}", p.mu1);
        }
    }
}
