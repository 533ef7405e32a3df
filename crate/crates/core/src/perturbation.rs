//! First-order (slow-rotation) theory by radial ODEs: the regular mode
//! solutions ψ_j, the monopole response h₀, the quadrupole amplitude A₂ and
//! the first-order oblateness.

use crate::error::{Error, Result};
use crate::lane_emden::{LaneEmdenProfile, SEED_RADIUS};
use crate::ode::{integrate, DenseTrajectory, StepControl};
use crate::spectral_grid::{legendre_eval, Grid, ModeSet};

fn step_control(profile: &LaneEmdenProfile) -> StepControl {
    StepControl::with_tol((profile.tol / 50.0).max(1e-15))
}

/// Regular solution ψ_j of −(1/r²)(r²y′)′ + j(j+1)y/r² = νθ^{ν−1}y,
/// normalized by ψ_j ~ r^j at the origin. Stored as φ = ψ_j / r^j.
#[derive(Debug, Clone)]
pub struct ModeODESolution {
    pub j: usize,
    pub nu: f64,
    pub xi1: f64,
    c2: f64,
    c4: f64,
    amplitude: f64,
    phi: DenseTrajectory<2>,
}

impl ModeODESolution {
    fn phi(&self, r: f64) -> [f64; 2] {
        if r <= SEED_RADIUS {
            let r2 = r * r;
            [
                1.0 + r2 * (self.c2 + r2 * self.c4),
                r * (2.0 * self.c2 + 4.0 * self.c4 * r2),
            ]
        } else {
            self.phi.eval(r)
        }
    }

    /// The same solution multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            amplitude: s * self.amplitude,
            ..self.clone()
        }
    }

    /// ψ_j(r) on [0, ξ₁].
    pub fn psi(&self, r: f64) -> f64 {
        self.amplitude * r.powi(self.j as i32) * self.phi(r)[0]
    }

    pub fn dpsi(&self, r: f64) -> f64 {
        let [p, dp] = self.phi(r);
        let j = self.j as i32;
        self.amplitude * r.powi(j - 1) * (self.j as f64 * p + r * dp)
    }

    /// ψ_j(r)/r^j, which tends to 1 at the origin for the normalized solution.
    pub fn normalized(&self, r: f64) -> f64 {
        self.amplitude * self.phi(r)[0]
    }
}

/// Integrates the mode equation for even `j ≥ 2` from its series at the
/// origin to ξ₁.
pub fn solve_ej(profile: &LaneEmdenProfile, j: usize) -> Result<ModeODESolution> {
    if j < 2 || !j.is_multiple_of(2) {
        return Err(Error::InvalidMode { j });
    }
    let nu = profile.nu;
    let jf = j as f64;
    // φ'' + 2(j+1)φ'/r + νθ^{ν−1}φ = 0 with φ = 1 + c₂r² + c₄r⁴ + ...
    let c2 = -nu / (2.0 * (2.0 * jf + 3.0));
    let c4 = -nu * (c2 - (nu - 1.0) / 6.0) / (4.0 * (2.0 * jf + 5.0));
    let r0 = SEED_RADIUS;
    let seed = [
        1.0 + c2 * r0 * r0 + c4 * r0.powi(4),
        2.0 * c2 * r0 + 4.0 * c4 * r0.powi(3),
    ];
    let rhs = |r: f64, y: &[f64; 2]| {
        [
            y[1],
            -2.0 * (jf + 1.0) * y[1] / r - nu * profile.theta_sharp_pow(r, nu - 1.0) * y[0],
        ]
    };
    let phi = integrate(rhs, r0, seed, profile.xi1, step_control(profile))
        .map_err(|_| Error::StepSizeUnderflow { r: profile.xi1 })?;
    Ok(ModeODESolution {
        j,
        nu,
        xi1: profile.xi1,
        c2,
        c4,
        amplitude: 1.0,
        phi,
    })
}

/// (j+1)ψ_j/r + dψ_j/dr at r = ξ₁; positive values rule out a nontrivial
/// exterior match for mode j.
pub fn dj_functional(sol: &ModeODESolution) -> f64 {
    let r = sol.xi1;
    (sol.j as f64 + 1.0) * sol.psi(r) / r + sol.dpsi(r)
}

/// Monopole response h₀ with −(1/r²)(r²h₀′)′ = νθ^{ν−1}h₀ − 1 and h₀(0) = 0,
/// built as y₀ − y₁/ν from a particular and a regular homogeneous solution.
#[derive(Debug, Clone)]
pub struct MonopoleSolution {
    pub nu: f64,
    pub xi1: f64,
    y0: DenseTrajectory<2>,
    y1: DenseTrajectory<2>,
}

impl MonopoleSolution {
    fn value_and_slope(&self, r: f64) -> [f64; 2] {
        if r <= SEED_RADIUS {
            let r2 = r * r;
            let nu = self.nu;
            return [
                r2 / 6.0 - nu * r2 * r2 / 120.0,
                r / 3.0 - nu * r2 * r / 30.0,
            ];
        }
        let (a, b) = (self.y0.eval(r), self.y1.eval(r));
        [a[0] - b[0] / self.nu, a[1] - b[1] / self.nu]
    }

    pub fn h0(&self, r: f64) -> f64 {
        self.value_and_slope(r)[0]
    }

    pub fn dh0(&self, r: f64) -> f64 {
        self.value_and_slope(r)[1]
    }
}

pub fn solve_h0(profile: &LaneEmdenProfile) -> Result<MonopoleSolution> {
    let nu = profile.nu;
    let r0 = SEED_RADIUS;
    let r4 = r0.powi(4);
    let y0_seed = [
        1.0 / nu + (nu - 1.0) * r4 / 120.0,
        (nu - 1.0) * r0.powi(3) / 30.0,
    ];
    let y1_seed = [
        1.0 - nu * r0 * r0 / 6.0 + nu * (2.0 * nu - 1.0) * r4 / 120.0,
        -nu * r0 / 3.0 + nu * (2.0 * nu - 1.0) * r0.powi(3) / 30.0,
    ];
    let weight = |r: f64| nu * profile.theta_sharp_pow(r, nu - 1.0);
    let particular = |r: f64, y: &[f64; 2]| [y[1], -2.0 * y[1] / r - weight(r) * y[0] + 1.0];
    let homogeneous = |r: f64, y: &[f64; 2]| [y[1], -2.0 * y[1] / r - weight(r) * y[0]];
    let ctl = step_control(profile);
    let fail = |_| Error::StepSizeUnderflow { r: profile.xi1 };
    Ok(MonopoleSolution {
        nu,
        xi1: profile.xi1,
        y0: integrate(particular, r0, y0_seed, profile.xi1, ctl).map_err(fail)?,
        y1: integrate(homogeneous, r0, y1_seed, profile.xi1, ctl).map_err(fail)?,
    })
}

/// Quadrupole amplitude and its exterior continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupoleMatch {
    /// Interior amplitude: h₂ = A₂ψ₂ on [0, ξ₁].
    pub a2: f64,
    /// Exterior coefficient: h₂ = −r²/6 + C₂r^{−3} beyond ξ₁.
    pub c2: f64,
    /// Relative mismatch of value and slope at ξ₁.
    pub matching_residual: f64,
}

/// Matches A₂ψ₂ to the exterior −r²/6 + C₂r^{−3} in value and slope at ξ₁.
pub fn coeff_a2(profile: &LaneEmdenProfile) -> Result<QuadrupoleMatch> {
    let psi2 = solve_ej(profile, 2)?;
    match_quadrupole(&psi2)
}

fn match_quadrupole(psi2: &ModeODESolution) -> Result<QuadrupoleMatch> {
    let x = psi2.xi1;
    let (p, dp) = (psi2.psi(x), psi2.dpsi(x));
    let denominator = 3.0 * p + x * dp;
    if denominator.abs() < 1e-12 {
        return Err(Error::DegenerateMatching { denominator });
    }
    let a2 = -5.0 / 6.0 * x * x / denominator;
    let c2 = x.powi(3) * (a2 * p + x * x / 6.0);
    let ext = -x * x / 6.0 + c2 / x.powi(3);
    let dext = -x / 3.0 - 3.0 * c2 / x.powi(4);
    let matching_residual = ((a2 * p - ext).abs() / ext.abs().max(f64::MIN_POSITIVE))
        .max((a2 * dp - dext).abs() / dext.abs().max(f64::MIN_POSITIVE));
    Ok(QuadrupoleMatch {
        a2,
        c2,
        matching_residual,
    })
}

/// The first-order response 𝔥 = h₀ + A₂ψ₂P₂ on [0, ξ₁].
#[derive(Debug, Clone)]
pub struct FirstOrder {
    pub nu: f64,
    pub xi1: f64,
    pub mu1: f64,
    pub h0: MonopoleSolution,
    pub psi2: ModeODESolution,
    pub quadrupole: QuadrupoleMatch,
}

impl FirstOrder {
    pub fn a2(&self) -> f64 {
        self.quadrupole.a2
    }

    /// 𝔥(r, ζ) for 0 ≤ r ≤ ξ₁.
    pub fn eval(&self, r: f64, zeta: f64) -> f64 {
        self.h0.h0(r) + self.a2() * self.psi2.psi(r) * legendre_eval(2, zeta)
    }

    /// Mode values at the grid nodes inside [0, ξ₁]; exterior entries are zero.
    pub fn modes_on(&self, grid: &Grid) -> ModeSet {
        let rg = &grid.radial;
        let mut m = ModeSet::zeros(grid.angular.j_max, rg.len());
        let n_int = rg.n_interior();
        for (i, &r) in rg.nodes[..n_int].iter().enumerate() {
            m.mode_mut(0)[i] = self.h0.h0(r);
            if grid.angular.j_max >= 2 {
                m.mode_mut(2)[i] = self.a2() * self.psi2.psi(r);
            }
        }
        m
    }

    /// σ₁ with σ = σ₁ε + O(ε²).
    pub fn sigma1(&self) -> f64 {
        -1.5 * (self.xi1 / self.mu1) * self.a2() * self.psi2.psi(self.xi1)
    }
}

pub fn frak_h(profile: &LaneEmdenProfile) -> Result<FirstOrder> {
    let psi2 = solve_ej(profile, 2)?;
    let quadrupole = match_quadrupole(&psi2)?;
    Ok(FirstOrder {
        nu: profile.nu,
        xi1: profile.xi1,
        mu1: profile.mu1,
        h0: solve_h0(profile)?,
        psi2,
        quadrupole,
    })
}

/// First-order oblateness coefficient σ₁ = −(3/2)(ξ₁/μ₁)A₂ψ₂(ξ₁).
pub fn sigma_first_order(profile: &LaneEmdenProfile) -> Result<f64> {
    Ok(frak_h(profile)?.sigma1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lane_emden::solve_lane_emden;

    fn profile(nu: f64) -> LaneEmdenProfile {
        solve_lane_emden(nu, 1e-12).unwrap()
    }

    #[test]
    fn rejects_odd_and_low_modes() {
        let p = profile(3.0);
        for j in [0, 1, 3] {
            assert_eq!(solve_ej(&p, j).unwrap_err(), Error::InvalidMode { j });
        }
    }

    #[test]
    fn mode_solution_normalization_and_monotonicity() {
        let p = profile(3.0);
        let s = solve_ej(&p, 2).unwrap();
        let n = s.normalized(SEED_RADIUS);
        assert!((n - 1.0).abs() < 1e-4);
        let mut prev = 0.0;
        for k in 1..=200 {
            let r = p.xi1 * k as f64 / 200.0;
            let v = s.psi(r);
            assert!(v > prev && s.dpsi(r) > 0.0, "r={r}");
            prev = v;
        }
    }

    #[test]
    fn mode_solution_satisfies_ode() {
        let p = profile(3.0);
        for j in [2, 4] {
            let s = solve_ej(&p, j).unwrap();
            let jj = (j * (j + 1)) as f64;
            for k in 1..=10 {
                let r = p.xi1 * (k as f64 - 0.5) / 10.0;
                let h = 1e-4 * r;
                let d2 = (s.psi(r + h) - 2.0 * s.psi(r) + s.psi(r - h)) / (h * h);
                let lap = d2 + 2.0 * s.dpsi(r) / r;
                let res =
                    -lap + jj * s.psi(r) / (r * r) - 3.0 * p.theta_sharp_pow(r, 2.0) * s.psi(r);
                let scale = jj * s.psi(r) / (r * r);
                assert!(res.abs() < 1e-6 * scale, "j={j} r={r} res={res}");
            }
        }
    }

    #[test]
    fn dj_functional_is_positive_and_linear() {
        for nu in [2.0, 3.0, 4.0] {
            let p = profile(nu);
            for j in [2, 4] {
                assert!(dj_functional(&solve_ej(&p, j).unwrap()) > 0.0);
            }
        }
        let s = solve_ej(&profile(3.0), 2).unwrap();
        let doubled = s.scaled(2.0);
        let ratio = dj_functional(&doubled) / dj_functional(&s);
        assert!((ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn h0_vanishes_at_origin_and_solves_its_ode() {
        let p = profile(3.0);
        let h = solve_h0(&p).unwrap();
        assert_eq!(h.h0(0.0), 0.0);
        assert!((h.h0(SEED_RADIUS) - SEED_RADIUS.powi(2) / 6.0).abs() < 1e-12);
        for k in 1..=10 {
            let r = p.xi1 * (k as f64 - 0.5) / 10.0;
            let e = 1e-4 * r;
            let d2 = (h.h0(r + e) - 2.0 * h.h0(r) + h.h0(r - e)) / (e * e);
            let res =
                -(d2 + 2.0 * h.dh0(r) / r) - (3.0 * p.theta_sharp_pow(r, 2.0) * h.h0(r) - 1.0);
            assert!(res.abs() < 1e-6, "r={r} res={res}");
        }
    }

    #[test]
    fn quadrupole_amplitude() {
        let p = profile(3.0);
        let q = coeff_a2(&p).unwrap();
        assert!(q.a2 < 0.0);
        assert!(q.matching_residual < 1e-8);
        let coarse = coeff_a2(&solve_lane_emden(3.0, 2e-12).unwrap()).unwrap();
        assert!((coarse.a2 - q.a2).abs() < 1e-6 * q.a2.abs());
    }

    #[test]
    fn first_order_shape() {
        let p = profile(3.0);
        let f = frak_h(&p).unwrap();
        for z in [-1.0, 0.0, 0.5] {
            assert_eq!(f.eval(0.0, z), 0.0);
        }
        for nu in [2.0, 3.0, 4.0] {
            assert!(sigma_first_order(&profile(nu)).unwrap() > 0.0);
        }
        let mut flipped = f.clone();
        flipped.quadrupole.a2 = -f.a2();
        assert_eq!(flipped.sigma1(), -f.sigma1());
    }

    /// RK4 for ψ'' + 2ψ'/r − 6ψ/r² + νθ^{ν−1}ψ = 0 started from ψ ~ r².
    #[test]
    fn quadrupole_matches_rk4() {
        let p = profile(3.0);
        let psi2 = solve_ej(&p, 2).unwrap();
        let nu = p.nu;
        let f = |r: f64, y: [f64; 2]| {
            let k = nu * p.eval_theta(r).max(0.0).powf(nu - 1.0);
            [y[1], -2.0 * y[1] / r + 6.0 * y[0] / (r * r) - k * y[0]]
        };
        let n = 20_000;
        let r0 = 1e-3;
        let h = (p.xi1 - r0) / n as f64;
        let mut r = r0;
        let mut y = [r0 * r0, 2.0 * r0];
        for _ in 0..n {
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
            y = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            r += h;
        }
        let psi = psi2.psi(p.xi1);
        assert!((psi - y[0]).abs() < 1e-4 * psi, "{psi} {}", y[0]);
    }
}
