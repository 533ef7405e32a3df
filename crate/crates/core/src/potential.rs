//! The Newtonian potential 𝒦ρ = (1/4π)∫ρ(x′)/|x − x′| dx′ of an
//! axisymmetric density, in multipole form on the radial grid and by direct
//! quadrature of the azimuthal kernel.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, legendre_with_derivative, GaussRule};
use crate::spectral_grid::{project, Grid, GridFunction, ModeSet, RadialGrid};

/// Separation `(a − b)/(a + b)` below which kernel values are flagged as
/// near-singular.
pub const NEAR_SINGULAR: f64 = 1e-6;

/// Separation below which the kernel is treated as evaluated at coincident points.
pub const COINCIDENCE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    pub near_singular: bool,
}

/// Arithmetic-geometric mean, iterated to 1e−15 relative change.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        let done = (an - bn).abs() <= 1e-15 * an;
        a = an;
        b = bn;
        if done {
            break;
        }
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind K(m) in terms of the
/// complementary modulus k′ = √(1 − m).
pub fn ellipk_complement(k_prime: f64) -> f64 {
    PI / (2.0 * agm(1.0, k_prime))
}

fn polar_angle(zeta: f64) -> f64 {
    ((1.0 - zeta) * (1.0 + zeta)).max(0.0).sqrt().atan2(zeta)
}

/// K(r,ζ,r′,ζ′) = ∫₀^{2π} dβ / |x − x′| with the azimuth of one point fixed.
pub fn azimuthal_kernel_eval(r: f64, zeta: f64, rp: f64, zetap: f64) -> Result<KernelEval> {
    let (alpha, alphap) = (polar_angle(zeta), polar_angle(zetap));
    let dr2 = (r - rp) * (r - rp);
    let rr4 = 4.0 * r * rp;
    // a − b and a + b without cancellation.
    let a_minus_b = dr2 + rr4 * (0.5 * (alpha - alphap)).sin().powi(2);
    let a_plus_b = dr2 + rr4 * (0.5 * (alpha + alphap)).sin().powi(2);
    if a_minus_b.is_nan() || a_minus_b <= COINCIDENCE_FLOOR {
        return Err(Error::CoincidentPoints { r, zeta });
    }
    let k_prime = (a_minus_b / a_plus_b).sqrt();
    Ok(KernelEval {
        value: 4.0 / a_plus_b.sqrt() * ellipk_complement(k_prime),
        near_singular: a_minus_b < NEAR_SINGULAR * a_plus_b,
    })
}

pub fn azimuthal_kernel(r: f64, zeta: f64, rp: f64, zetap: f64) -> Result<f64> {
    azimuthal_kernel_eval(r, zeta, rp, zetap).map(|k| k.value)
}

/// G_j(r, r′) = min^j / ((2j+1) max^{j+1}).
pub fn mode_green(j: usize, r: f64, rp: f64) -> f64 {
    let (lo, hi) = if r < rp { (r, rp) } else { (rp, r) };
    lo.powi(j as i32) / ((2 * j + 1) as f64 * hi.powi(j as i32 + 1))
}

/// ∂G_j/∂r (one-sided values agree except for j = 0 at r = r′).
pub fn mode_green_dr(j: usize, r: f64, rp: f64) -> f64 {
    let c = (2 * j + 1) as f64;
    let ji = j as i32;
    if rp < r {
        -((j + 1) as f64) * rp.powi(ji) / (c * r.powi(ji + 2))
    } else if j == 0 {
        0.0
    } else {
        j as f64 * r.powi(ji - 1) / (c * rp.powi(ji + 1))
    }
}

/// Product-integration weights: `Σ_i out[i]·ρ(r_i) ≈ ∫₀^{R₀} k(s) ρ(s) ds`
/// for `ρ` interpolated panel-wise through the grid values, where `k` is
/// smooth on each side of `r`. The panel containing `r` is split at `r`,
/// and its right part is graded geometrically so that `s^{−j}`-type
/// kernels stay resolved near the origin.
fn product_weights(rg: &RadialGrid, r: f64, k: impl Fn(f64) -> f64, out: &mut [f64]) {
    let rule = rg.rule();
    let n = rule.len();
    let split = rg.panel_containing(r);
    let mut basis = vec![0.0; n];
    for p in 0..rg.n_panels() {
        let idx = rg.panel_nodes(p);
        if Some(p) != split {
            for i in idx {
                out[i] = rg.weights[i] * k(rg.nodes[i]);
            }
            continue;
        }
        let (a, b) = rg.panel_bounds(p);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let o = &mut out[idx];
        o.iter_mut().for_each(|v| *v = 0.0);
        let mut pieces = vec![(a, r)];
        let mut lo = r;
        while b > 2.0 * lo {
            pieces.push((lo, 2.0 * lo));
            lo *= 2.0;
        }
        pieces.push((lo, b));
        for (pa, pb) in pieces {
            for (s, ws) in rule.mapped(pa, pb) {
                rule.lagrange_basis((s - mid) / half, &mut basis);
                let f = ws * k(s);
                for (v, l) in o.iter_mut().zip(&basis) {
                    *v += f * l;
                }
            }
        }
    }
}

/// The multipole Newton operator on a fixed grid: one dense weight matrix
/// per even mode, `(𝒦ρ)_j(r_i) = Σ_{i′} W_j[i,i′] ρ_j(r_{i′})`.
#[derive(Debug, Clone)]
pub struct NewtonOperator {
    grid: Arc<Grid>,
    matrices: Vec<DMatrix<f64>>,
    origin: Vec<f64>,
}

impl NewtonOperator {
    pub fn new(grid: &Arc<Grid>) -> Self {
        let rg = &grid.radial;
        let n = rg.len();
        let matrices = grid
            .angular
            .even_modes()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|j| {
                let mut m = DMatrix::zeros(n, n);
                let mut row = vec![0.0; n];
                for (i, &r) in rg.nodes.iter().enumerate() {
                    weights_at(rg, j, r, &mut row);
                    for (c, &v) in row.iter().enumerate() {
                        m[(i, c)] = v;
                    }
                }
                m
            })
            .collect();
        let origin = rg
            .nodes
            .iter()
            .zip(&rg.weights)
            .map(|(r, w)| r * w)
            .collect();
        Self {
            grid: Arc::clone(grid),
            matrices,
            origin,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Weight matrix of mode `j`.
    pub fn matrix(&self, j: usize) -> &DMatrix<f64> {
        &self.matrices[j / 2]
    }

    /// Weights giving (𝒦ρ)(0) = Σ_i origin[i]·ρ₀(r_i) = ∫ρ₀ r′ dr′.
    pub fn origin_weights(&self) -> &[f64] {
        &self.origin
    }

    /// Per-mode potential at the grid nodes.
    pub fn apply_modes(&self, density: &ModeSet) -> ModeSet {
        let modes = density
            .iter()
            .map(|(j, rho)| {
                let m = self.matrix(j);
                (0..m.nrows())
                    .map(|i| m.row(i).iter().zip(rho).map(|(w, x)| w * x).sum())
                    .collect()
            })
            .collect();
        ModeSet::from_modes(density.j_max, modes)
    }

    /// (𝒦ρ)(0, ζ), which only sees mode 0.
    pub fn origin_value(&self, density: &ModeSet) -> f64 {
        self.origin
            .iter()
            .zip(density.mode(0))
            .map(|(w, x)| w * x)
            .sum()
    }

    /// Radial potential modes V_j(r) and their r-derivatives at any r ≥ 0.
    pub fn modes_at(&self, density: &ModeSet, r: f64) -> Vec<(usize, f64, f64)> {
        let rg = &self.grid.radial;
        let mut w = vec![0.0; rg.len()];
        let mut dw = vec![0.0; rg.len()];
        density
            .iter()
            .map(|(j, rho)| {
                weights_at(rg, j, r, &mut w);
                let v = w.iter().zip(rho).map(|(a, b)| a * b).sum();
                let dv = if r > 0.0 {
                    dweights_at(rg, j, r, &mut dw);
                    dw.iter().zip(rho).map(|(a, b)| a * b).sum()
                } else {
                    0.0
                };
                (j, v, dv)
            })
            .collect()
    }
}

/// Row of W_j at an arbitrary radius: Σ_i out[i]ρ(r_i) ≈ ∫G_j(r,s)ρ(s)s² ds.
pub fn weights_at(rg: &RadialGrid, j: usize, r: f64, out: &mut [f64]) {
    product_weights(rg, r, |s| mode_green(j, r, s) * s * s, out);
}

/// Weights for d/dr ∫G_j(r,s)ρ(s)s² ds.
pub fn dweights_at(rg: &RadialGrid, j: usize, r: f64, out: &mut [f64]) {
    product_weights(rg, r, |s| mode_green_dr(j, r, s) * s * s, out);
}

pub fn apply_newton_modes(op: &NewtonOperator, density: &ModeSet) -> ModeSet {
    op.apply_modes(density)
}

/// Σ_j V_j(r) P_j(ζ), valid on and off the grid and beyond R₀.
pub fn eval_potential_at(op: &NewtonOperator, density: &ModeSet, r: f64, zeta: f64) -> f64 {
    op.modes_at(density, r)
        .into_iter()
        .map(|(j, v, _)| v * legendre_with_derivative(j, zeta).0)
        .sum()
}

/// (∂/∂r, ∂/∂ζ) of [`eval_potential_at`].
pub fn eval_potential_grad_at(
    op: &NewtonOperator,
    density: &ModeSet,
    r: f64,
    zeta: f64,
) -> (f64, f64) {
    op.modes_at(density, r)
        .into_iter()
        .fold((0.0, 0.0), |(gr, gz), (j, v, dv)| {
            let (p, dp) = legendre_with_derivative(j, zeta);
            (gr + dv * p, gz + v * dp)
        })
}

/// Tolerances of the direct path.
const DIRECT_INNER_TOL: f64 = 1e-11;
const DIRECT_OUTER_TOL: f64 = 1e-10;

/// Slow cross-check of the multipole path: direct quadrature of the
/// azimuthal kernel against the density at every node. The density is
/// interpolated in r by the panel polynomials and in ζ by the full
/// polynomial through the angular nodes; the kernel singularity at the
/// target is removed by subtracting the density value there and adding back
/// the potential of a uniform ball of radius R₀.
pub fn apply_newton_direct(density: &GridFunction) -> GridFunction {
    let grid = density.grid();
    let interp = DensityInterpolant::new(density);
    let rg = &grid.radial;
    let nh = grid.angular.n_half();
    let half = grid.angular.half_nodes().to_vec();
    let values: Vec<f64> = (0..rg.len() * nh)
        .into_par_iter()
        .map(|idx| {
            let (i, kh) = (idx / nh, idx % nh);
            let (r, zeta) = (rg.nodes[i], half[kh]);
            let rho_t = density.get_half(i, kh);
            let outer = |rp: f64| {
                if rp <= 0.0 {
                    return 0.0;
                }
                let coeffs = interp.radial_coeffs(rp);
                let inner = |zp: f64| {
                    let k = azimuthal_kernel(r, zeta, rp, zp).unwrap_or(0.0);
                    k * (interp.eval_zeta(&coeffs, zp) - rho_t)
                };
                let f = |zp: f64| inner(zp);
                rp * rp
                    * (adaptive_integrate(&f, -1.0, -zeta, DIRECT_INNER_TOL)
                        + adaptive_integrate(&f, -zeta, zeta, DIRECT_INNER_TOL)
                        + adaptive_integrate(&f, zeta, 1.0, DIRECT_INNER_TOL))
            };
            let mut breaks: Vec<f64> = rg.panel_breaks.clone();
            breaks.push(r);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let regular: f64 = breaks
                .windows(2)
                .map(|w| adaptive_integrate(&outer, w[0], w[1], DIRECT_OUTER_TOL))
                .sum();
            regular / (4.0 * PI) + rho_t * (0.5 * rg.r0 * rg.r0 - r * r / 6.0)
        })
        .collect();
    GridFunction::from_values(grid, values).expect("shape matches grid")
}

/// Continuous interpolant of an even grid function: panel polynomials in r,
/// even Legendre series through all angular nodes in ζ.
struct DensityInterpolant<'a> {
    rg: &'a RadialGrid,
    /// Even Legendre coefficients per radial node.
    coeffs: Vec<Vec<f64>>,
    degrees: Vec<usize>,
}

impl<'a> DensityInterpolant<'a> {
    fn new(f: &'a GridFunction) -> Self {
        let grid = f.grid();
        let ag = &grid.angular;
        let n = ag.order();
        let degrees: Vec<usize> = (0..n).step_by(2).collect();
        let rule = GaussRule::new(n);
        let coeffs = (0..grid.radial.len())
            .map(|i| {
                degrees
                    .iter()
                    .map(|&j| {
                        (j as f64 + 0.5)
                            * (0..n)
                                .map(|k| {
                                    rule.weights[k]
                                        * f.get(i, k)
                                        * legendre_with_derivative(j, rule.nodes[k]).0
                                })
                                .sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        Self {
            rg: &grid.radial,
            coeffs,
            degrees,
        }
    }

    /// Legendre coefficients at radius `r` (zero outside the grid).
    fn radial_coeffs(&self, r: f64) -> Vec<f64> {
        let rg = self.rg;
        let mut out = vec![0.0; self.degrees.len()];
        if r >= rg.r0 {
            return out;
        }
        let p = rg
            .panel_breaks
            .partition_point(|&b| b <= r)
            .clamp(1, rg.n_panels())
            - 1;
        let (a, b) = rg.panel_bounds(p);
        let mut basis = vec![0.0; rg.order()];
        rg.rule()
            .lagrange_basis((2.0 * r - a - b) / (b - a), &mut basis);
        for (l, i) in basis.iter().zip(rg.panel_nodes(p)) {
            for (o, c) in out.iter_mut().zip(&self.coeffs[i]) {
                *o += l * c;
            }
        }
        out
    }

    fn eval_zeta(&self, coeffs: &[f64], zeta: f64) -> f64 {
        // Even-degree Legendre recurrence, stepping two degrees at a time.
        let (mut p0, mut p1) = (1.0, zeta);
        let mut sum = coeffs[0];
        let mut deg = 1usize;
        for (&j, &c) in self.degrees.iter().zip(coeffs).skip(1) {
            while deg < j {
                let k = (deg + 1) as f64;
                let p2 = ((2.0 * k - 1.0) * zeta * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
                deg += 1;
            }
            sum += c * p1;
        }
        sum
    }
}

/// Project and apply in one step (density given on the grid).
pub fn newton_potential(op: &NewtonOperator, density: &GridFunction) -> ModeSet {
    op.apply_modes(&project(density))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_grid::{synthesize, AngularGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(
        a: f64,
        inner: usize,
        outer: usize,
        order: usize,
        ang: usize,
        j_max: usize,
    ) -> Arc<Grid> {
        Arc::new(Grid {
            radial: RadialGrid::new(a, 2.0 * a, inner, outer, order).unwrap(),
            angular: AngularGrid::new(ang, j_max).unwrap(),
        })
    }

    fn trapezoid_kernel(r: f64, z: f64, rp: f64, zp: f64, n: usize) -> f64 {
        let (s, sp) = ((1.0 - z * z).sqrt(), (1.0 - zp * zp).sqrt());
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|k| {
                let b = k as f64 * h;
                h / (r * r + rp * rp - 2.0 * r * rp * (s * sp * b.cos() + z * zp)).sqrt()
            })
            .sum()
    }

    #[test]
    fn kernel_at_origin_is_constant() {
        for (rp, zp) in [(0.5, 0.3), (2.0, -0.9), (1.0, 1.0)] {
            let k = azimuthal_kernel(0.0, 0.2, rp, zp).unwrap();
            assert!((k - 2.0 * PI / rp).abs() < 1e-14 * k);
        }
    }

    #[test]
    fn kernel_symmetric_and_matches_trapezoid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (r, z, rp, zp) = (
                rng.gen_range(0.1..3.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.1..3.0),
                rng.gen_range(-1.0..1.0),
            );
            let k = azimuthal_kernel(r, z, rp, zp).unwrap();
            assert_eq!(k, azimuthal_kernel(rp, zp, r, z).unwrap());
            let t = trapezoid_kernel(r, z, rp, zp, 100_000);
            assert!((k - t).abs() < 1e-10 * t, "{k} {t}");
        }
    }

    #[test]
    fn kernel_flags_coincidence() {
        assert!(matches!(
            azimuthal_kernel(1.0, 0.5, 1.0, 0.5),
            Err(Error::CoincidentPoints { .. })
        ));
        let near = azimuthal_kernel_eval(1.0, 0.5, 1.0 + 1e-5, 0.5).unwrap();
        assert!(near.near_singular && near.value > 0.0);
    }

    #[test]
    fn green_function_basics() {
        assert_eq!(mode_green(0, 2.0, 3.0), 1.0 / 3.0);
        assert_eq!(mode_green(4, 2.0, 3.0), mode_green(4, 3.0, 2.0));
        assert_eq!(mode_green(0, 0.0, 2.0), 0.5);
        assert_eq!(mode_green(2, 0.0, 2.0), 0.0);
        for j in [0, 2, 4] {
            for (r, rp) in [(1.0, 2.0), (2.0, 1.0)] {
                let h = 1e-6;
                let fd = (mode_green(j, r + h, rp) - mode_green(j, r - h, rp)) / (2.0 * h);
                assert!((fd - mode_green_dr(j, r, rp)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn multipole_series_matches_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let r = rng.gen_range(0.2..2.0);
            let rp = r * rng.gen_range(0.05..0.5);
            let (z, zp) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let series: f64 = (0..=40)
                .map(|j| {
                    2.0 * PI
                        * (2 * j + 1) as f64
                        * mode_green(j, r, rp)
                        * legendre_with_derivative(j, z).0
                        * legendre_with_derivative(j, zp).0
                })
                .sum();
            let k = azimuthal_kernel(r, z, rp, zp).unwrap();
            assert!((series - k).abs() < 1e-8 * k, "{series} {k}");
        }
    }

    fn ball_density(g: &Arc<Grid>, a: f64) -> ModeSet {
        let mut m = ModeSet::zeros(g.angular.j_max, g.radial.len());
        for (v, &r) in m.mode_mut(0).iter_mut().zip(&g.radial.nodes) {
            *v = if r < a { 1.0 } else { 0.0 };
        }
        m
    }

    fn ball_potential(a: f64, r: f64) -> f64 {
        if r >= a {
            a * a * a / (3.0 * r)
        } else {
            0.5 * (a * a - r * r / 3.0)
        }
    }

    #[test]
    fn uniform_ball_potential() {
        let a = 1.7;
        let g = grid(a, 3, 2, 12, 16, 4);
        let op = NewtonOperator::new(&g);
        let rho = ball_density(&g, a);
        let v = op.apply_modes(&rho);
        for (i, &r) in g.radial.nodes.iter().enumerate() {
            assert!((v.mode(0)[i] - ball_potential(a, r)).abs() < 1e-13, "r={r}");
            assert!(v.mode(2)[i] == 0.0);
        }
        assert!((op.origin_value(&rho) - 0.5 * a * a).abs() < 1e-13);
        for r in [0.0, 0.3, 1.7, 2.5, 2.0 * a, 7.0] {
            let off = eval_potential_at(&op, &rho, r, 0.4);
            assert!((off - ball_potential(a, r)).abs() < 1e-13, "r={r}");
            assert_eq!(off, eval_potential_at(&op, &rho, r, -0.9));
        }
        // Decay: r·V → M₀.
        let m0 = a * a * a / 3.0;
        let far = 10.0 * g.radial.r0;
        assert!((far * eval_potential_at(&op, &rho, far, 0.0) - m0).abs() < 1e-8);
    }

    #[test]
    fn zero_density_gives_zero() {
        let g = grid(1.0, 2, 1, 8, 8, 4);
        let op = NewtonOperator::new(&g);
        let v = op.apply_modes(&ModeSet::zeros(4, g.radial.len()));
        assert!(v.iter().all(|(_, h)| h.iter().all(|&x| x == 0.0)));
        let d = apply_newton_direct(&GridFunction::zeros(&g));
        assert!(d.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn grid_rows_match_off_grid_evaluation() {
        let g = grid(2.0, 2, 1, 10, 16, 6);
        let op = NewtonOperator::new(&g);
        let f = GridFunction::from_fn(&g, |r, z| (-(r * r)).exp() * (1.0 + z * z * r));
        let rho = project(&f);
        let v = synthesize(&op.apply_modes(&rho), &g);
        for i in [0, 5, 17, 29] {
            for kh in 0..g.angular.n_half() {
                let (r, z) = (g.radial.nodes[i], g.angular.half_nodes()[kh]);
                let off = eval_potential_at(&op, &rho, r, z);
                assert!((off - v.get_half(i, kh)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = grid(2.0, 3, 2, 12, 16, 6);
        let op = NewtonOperator::new(&g);
        let f = GridFunction::from_fn(&g, |r, z| {
            if r < 2.0 {
                (1.0 - r * r / 4.0).powi(2) * (1.0 + 0.3 * z * z)
            } else {
                0.0
            }
        });
        let rho = project(&f);
        for (r, z) in [(0.37, 0.2), (1.21, 0.77), (2.9, 0.5), (5.0, 0.1)] {
            let (gr, gz) = eval_potential_grad_at(&op, &rho, r, z);
            let h = 1e-5;
            let fr = (eval_potential_at(&op, &rho, r + h, z)
                - eval_potential_at(&op, &rho, r - h, z))
                / (2.0 * h);
            let fz = (eval_potential_at(&op, &rho, r, z + h)
                - eval_potential_at(&op, &rho, r, z - h))
                / (2.0 * h);
            assert!((gr - fr).abs() < 1e-8, "{gr} {fr}");
            assert!((gz - fz).abs() < 1e-8, "{gz} {fz}");
        }
    }

    #[test]
    fn exterior_modes_are_harmonic() {
        let a = 1.0;
        let g = grid(a, 3, 3, 12, 16, 4);
        let op = NewtonOperator::new(&g);
        let f = GridFunction::from_fn(&g, |r, z| {
            if r < a {
                (1.0 - r * r) * (1.0 + z * z)
            } else {
                0.0
            }
        });
        let v = op.apply_modes(&project(&f));
        let n_in = g.radial.n_interior();
        for j in [0, 2, 4] {
            let h = v.mode(j);
            let r_ref = g.radial.nodes[n_in];
            let c = h[n_in] * r_ref.powi(j as i32 + 1);
            for (&hi, &r) in h.iter().zip(&g.radial.nodes).skip(n_in) {
                let pred = c / r.powi(j as i32 + 1);
                assert!((hi - pred).abs() <= 1e-8 * pred.abs().max(1e-300), "j={j}");
            }
        }
    }

    #[test]
    fn direct_path_reproduces_uniform_ball() {
        let a = 1.0;
        let g = grid(a, 2, 1, 8, 8, 4);
        let f = GridFunction::from_fn(&g, |r, _| if r < a { 1.0 } else { 0.0 });
        let d = apply_newton_direct(&f);
        for i in 0..g.radial.len() {
            let exact = ball_potential(a, g.radial.nodes[i]);
            for kh in 0..g.angular.n_half() {
                assert!((d.get_half(i, kh) - exact).abs() < 1e-6, "i={i}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn kernel_is_symmetric_and_even(
            r in 0.05..5.0f64, z in -1.0..1.0f64, rp in 0.05..5.0f64, zp in -1.0..1.0f64,
        ) {
            proptest::prop_assume!((r - rp).abs() > 1e-3 || (z - zp).abs() > 1e-3);
            let k = azimuthal_kernel(r, z, rp, zp).unwrap();
            proptest::prop_assert!(k > 0.0 && k.is_finite());
            proptest::prop_assert_eq!(k, azimuthal_kernel(rp, zp, r, z).unwrap());
            let m = azimuthal_kernel(r, -z, rp, -zp).unwrap();
            proptest::prop_assert!((k - m).abs() <= 1e-14 * k);
        }
    }
}
