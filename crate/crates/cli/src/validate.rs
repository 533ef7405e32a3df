use std::f64::consts::PI;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotstar_core::lane_emden::{integrate_lane_emden, pos_pow, solve_lane_emden_with_limit};
use rotstar_core::perturbation::{dj_functional, frak_h, solve_ej};
use rotstar_core::potential::{apply_newton_direct, azimuthal_kernel, NewtonOperator};
use rotstar_core::spectral_grid::{
    legendre_eval, make_grids, project, sup_norm, synthesize, GridFunction, ModeSet,
};
use rotstar_core::surface::{find_xi1, pole_slope, surface_profile};
use rotstar_core::{solve_lane_emden, Error, Solver, SolverConfig};

use crate::snapshot::SolutionSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
    Skip,
}

#[derive(Debug, Clone)]
pub struct Property {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

type Check = Result<(bool, String)>;

const INDEX_SWEEP: [f64; 5] = [2.0, 2.5, 3.0, 4.0, 4.5];
const EPS_LADDER: [f64; 3] = [4e-3, 2e-3, 1e-3];

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn le(c: &SolverConfig, nu: f64) -> Result<rotstar_core::LaneEmdenProfile> {
    Ok(solve_lane_emden(nu, c.le_tol)?)
}

fn linear_radius(c: &SolverConfig) -> Check {
    let p = le(c, 1.0)?;
    let d = (p.xi1 - PI).abs().max((p.mu1 - PI).abs());
    Ok((
        d <= 1e-8,
        format!("max(|xi1-pi|, |mu1-pi|) = {d:.1e} (<= 1e-8)"),
    ))
}

fn linear_profile(c: &SolverConfig) -> Check {
    let p = le(c, 1.0)?;
    let d = max_abs((1..=100).map(|k| {
        let r = PI * k as f64 / 100.0;
        p.eval_theta(r) - r.sin() / r
    }));
    Ok((
        d <= 1e-8,
        format!("max |theta - sin r/r| = {d:.1e} (<= 1e-8)"),
    ))
}

fn index_five_profile(c: &SolverConfig) -> Check {
    let t = integrate_lane_emden(5.0, c.le_tol, 10.0)?;
    let d = max_abs((0..=100).map(|k| {
        let r = k as f64 / 10.0;
        t.eval(r)[0] - (1.0 + r * r / 3.0).powf(-0.5)
    }));
    Ok((
        d <= 1e-8,
        format!("max |theta - (1+r^2/3)^-1/2| on [0,10] = {d:.1e} (<= 1e-8)"),
    ))
}

fn index_five_no_zero(c: &SolverConfig) -> Check {
    let r = solve_lane_emden_with_limit(5.0, c.le_tol, 100.0);
    let ok = matches!(r, Err(Error::NoFiniteZero { .. }));
    Ok((
        ok,
        format!(
            "r_max = 100 gives {}",
            r.err().map_or("a zero".into(), |e| e.to_string())
        ),
    ))
}

fn mass_identity(c: &SolverConfig) -> Check {
    let mut worst = 0.0_f64;
    for nu in [2.0, 3.0, 4.0] {
        let p = le(c, nu)?;
        worst = worst.max((p.mass_between(0.0, p.xi1) - p.mu1).abs());
    }
    let tol = 10.0 * c.le_tol;
    Ok((
        worst <= tol,
        format!("max |mu1 - int theta^nu r^2| = {worst:.1e} (<= {tol:.0e})"),
    ))
}

fn extension(c: &SolverConfig) -> Check {
    let p = le(c, c.nu)?;
    let h = 1e-9 * p.xi1;
    let jump = (p.eval_dtheta(p.xi1 - h) - p.eval_dtheta(p.xi1 + h)).abs();
    let far = (p.eval_theta(2.0 * p.xi1) + p.mu1 / (2.0 * p.xi1)).abs();
    let ok = jump <= 1e-7 && far <= 1e-14 && p.eval_theta(p.xi1).abs() <= 1e-12;
    Ok((
        ok,
        format!("slope jump at xi1 = {jump:.1e}, exterior formula error = {far:.1e}"),
    ))
}

fn milne_ratio(c: &SolverConfig) -> Check {
    let p = le(c, c.nu)?;
    let f: Vec<f64> = (1..400)
        .map(|k| p.milne_ratio(p.xi1 * k as f64 / 400.0))
        .collect::<rotstar_core::Result<_>>()?;
    let ok = f.windows(2).all(|w| w[1] > w[0]) && f[0] > 0.0;
    Ok((
        ok,
        format!(
            "-r theta'/theta increasing on 399 points, last = {:.3e}",
            f[f.len() - 1]
        ),
    ))
}

fn kovetz_bound(c: &SolverConfig) -> Check {
    let mut worst = 0.0_f64;
    for k in 0..30 {
        worst = worst.max(le(c, 2.0 + 0.1 * k as f64)?.kovetz_sup().0);
    }
    Ok((
        worst < 6.0,
        format!("max m_bar over nu in [2, 5) step 0.1 = {worst:.4} (< 6)"),
    ))
}

fn kovetz_table(c: &SolverConfig) -> Check {
    let rows = [(1.0, 9.9), (2.0, 1.8), (2.5, 2.3), (3.0, 4.0), (4.0, 3.8)]
        .iter()
        .map(|&(nu, t)| Ok(format!("{nu}: {:.3} vs {t}", le(c, nu)?.kovetz_sup().0)))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        true,
        format!("computed vs reference table: {}", rows.join(", ")),
    ))
}

fn q_identity(c: &SolverConfig) -> Check {
    let mut worst = 0.0_f64;
    for nu in [2.0, 3.0, 4.0] {
        worst = worst.max(le(c, nu)?.q_identity_residual());
    }
    Ok((
        worst <= 1e-6,
        format!("max relative residual at nu in {{2,3,4}} = {worst:.1e} (<= 1e-6)"),
    ))
}

fn mode_functional(c: &SolverConfig) -> Check {
    let mut worst = f64::INFINITY;
    for nu in INDEX_SWEEP {
        let p = le(c, nu)?;
        for j in [2, 4, 6] {
            worst = worst.min(dj_functional(&solve_ej(&p, j)?));
        }
    }
    Ok((
        worst > 0.0,
        format!("min (j+1)psi_j/r + psi_j' at xi1 = {worst:.4e} (> 0)"),
    ))
}

fn mode_monotone(c: &SolverConfig) -> Check {
    let mut ok = true;
    for nu in INDEX_SWEEP {
        let p = le(c, nu)?;
        for j in [2, 4, 6] {
            let s = solve_ej(&p, j)?;
            let v: Vec<f64> = (0..=200).map(|k| s.psi(p.xi1 * k as f64 / 200.0)).collect();
            ok &= v.windows(2).all(|w| w[1] > w[0]);
        }
    }
    Ok((
        ok,
        "psi_j increasing for j in {2,4,6} over the index sweep".into(),
    ))
}

fn trapezoid_kernel(r: f64, z: f64, rp: f64, zp: f64, n: usize) -> f64 {
    let (s, sp) = ((1.0 - z * z).sqrt(), (1.0 - zp * zp).sqrt());
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            h / (r * r + rp * rp - 2.0 * r * rp * (s * sp * (k as f64 * h).cos() + z * zp)).sqrt()
        })
        .sum()
}

fn kernel_trapezoid(_: &SolverConfig) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let (r, z, rp, zp) = (
            rng.gen_range(0.1..5.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(0.1..5.0),
            rng.gen_range(-1.0..=1.0),
        );
        let k = azimuthal_kernel(r, z, rp, zp)?;
        let t = trapezoid_kernel(r, z, rp, zp, 200_000);
        worst = worst.max((k - t).abs() / t);
    }
    Ok((
        worst <= 1e-10,
        format!("max relative error over 50 pairs = {worst:.1e} (<= 1e-10)"),
    ))
}

fn kernel_multipole(_: &SolverConfig) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let hi: f64 = rng.gen_range(0.5..5.0);
        let lo = hi * rng.gen_range(0.0..=0.5);
        let (z, zp) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let k = azimuthal_kernel(hi, z, lo, zp)?;
        let q = lo / hi;
        let m: f64 = 2.0 * PI / hi
            * (0..=60)
                .map(|l| q.powi(l) * legendre_eval(l as usize, z) * legendre_eval(l as usize, zp))
                .sum::<f64>();
        worst = worst.max((k - m).abs() / k);
    }
    Ok((
        worst <= 1e-8,
        format!("max relative error at radius ratio <= 0.5 = {worst:.1e} (<= 1e-8)"),
    ))
}

fn uniform_ball(c: &SolverConfig) -> Check {
    let p = le(c, c.nu)?;
    let grid = make_grids(c, p.xi1)?;
    let op = NewtonOperator::new(&grid);
    let a = p.xi1;
    let mut rho = ModeSet::zeros(grid.angular.j_max, grid.radial.len());
    for (v, &r) in rho.mode_mut(0).iter_mut().zip(&grid.radial.nodes) {
        *v = if r <= a { 1.0 } else { 0.0 };
    }
    let v = op.apply_modes(&rho);
    let exact = |r: f64| {
        if r <= a {
            a * a / 2.0 - r * r / 6.0
        } else {
            a * a * a / (3.0 * r)
        }
    };
    let d = max_abs(
        grid.radial
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| v.mode(0)[i] - exact(r)),
    );
    Ok((
        d <= 1e-10,
        format!("max error of uniform-ball potential = {d:.1e} (<= 1e-10)"),
    ))
}

fn direct_vs_multipole(c: &SolverConfig) -> Check {
    let small = SolverConfig {
        inner_panels: 4,
        outer_panels: 2,
        panel_order: 8,
        angular_order: 16,
        ..c.clone()
    };
    let p = le(c, c.nu)?;
    let grid = make_grids(&small, p.xi1)?;
    let density = GridFunction::from_fn(&grid, |r, z| {
        pos_pow(p.eval_theta(r), c.nu) * (1.0 + 0.5 * z * z)
    });
    let op = NewtonOperator::new(&grid);
    let multipole = synthesize(&op.apply_modes(&project(&density)), &grid);
    let d = sup_norm(&apply_newton_direct(&density).sub(&multipole));
    Ok((
        d <= 1e-5,
        format!("sup difference on a 48x16 grid = {d:.1e} (<= 1e-5)"),
    ))
}

fn theta_fixed_point(c: &SolverConfig) -> Check {
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    for nu in INDEX_SWEEP {
        let s = Solver::new(&SolverConfig { nu, ..c.clone() })?;
        let core = s.core();
        let d = sup_norm(&core.apply_g(core.theta()).sub(core.theta()));
        worst = worst.max(d);
        rows.push(format!("{nu}:{d:.1e}"));
    }
    Ok((
        worst <= 5e-5,
        format!("sup |G(theta) - theta| by nu {} (<= 5e-5)", rows.join(" ")),
    ))
}

struct Context {
    solver: Solver,
}

impl Context {
    fn new(c: &SolverConfig) -> Result<Self> {
        Ok(Self {
            solver: Solver::new(c)?,
        })
    }
}

fn resolvent_condition(ctx: &Context) -> Check {
    let conds = ctx.solver.resolvent().condition_numbers();
    let worst = conds.iter().cloned().fold(0.0, f64::max);
    Ok((
        worst < 1e12,
        format!("max mode condition number = {worst:.3e} (< 1e12)"),
    ))
}

fn resolvent_inverse(ctx: &Context) -> Check {
    let s = &ctx.solver;
    let u = GridFunction::from_fn(s.grid(), |r, z| (0.3 * r).sin() * (1.0 + z * z) + 0.1);
    let h = s.resolvent().apply(&u);
    let d = sup_norm(&h.sub(&s.core().apply_dg_theta(&h)).sub(&u));
    Ok((
        d <= 1e-10,
        format!("sup |(1 - DG) R s - s| = {d:.1e} (<= 1e-10)"),
    ))
}

fn resolvent_first_order(ctx: &Context) -> Check {
    let s = &ctx.solver;
    let h = s.first_order();
    let f = frak_h(s.profile())?;
    let grid = s.grid();
    let n_int = grid.radial.n_interior();
    let mut d = 0.0_f64;
    for i in 0..n_int {
        for (kh, &z) in grid.angular.half_nodes().iter().enumerate() {
            d = d.max((h.get_half(i, kh) - f.eval(grid.radial.nodes[i], z)).abs());
        }
    }
    Ok((
        d <= 1e-5,
        format!("sup |R(g) - h0 - A2 psi2 P2| on [0, xi1] = {d:.1e} (<= 1e-5)"),
    ))
}

fn resolvent_high_modes(ctx: &Context) -> Check {
    let s = &ctx.solver;
    let n_int = s.grid().radial.n_interior();
    let modes = project(&s.first_order());
    let d = max_abs(
        modes
            .iter()
            .filter(|(j, _)| *j >= 4)
            .flat_map(|(_, m)| m[..n_int].to_vec()),
    );
    Ok((
        d <= 1e-6,
        format!("max |mode j >= 4 of R(g)| on [0, xi1] = {d:.1e} (<= 1e-6)"),
    ))
}

fn chandrasekhar_signs(c: &SolverConfig) -> Check {
    let mut rows = Vec::new();
    let mut ok = true;
    for nu in [2.0, 3.0, 4.0] {
        let f = frak_h(&le(c, nu)?)?;
        ok &= f.a2() < 0.0 && f.sigma1() > 0.0 && f.h0.h0(0.0) == 0.0;
        rows.push(format!("{nu}: A2={:.4} sigma1={:.4}", f.a2(), f.sigma1()));
    }
    Ok((
        ok,
        format!("A2 < 0, sigma1 > 0, h0(0) = 0; {}", rows.join(", ")),
    ))
}

fn zero_rotation(ctx: &Context) -> Check {
    let sol = ctx.solver.solve(0.0)?;
    let ok = sol.report.iterations == 1 && sol.deviation() == 0.0;
    Ok((
        ok,
        format!(
            "iterations = {}, |Theta - theta| = {:e}",
            sol.report.iterations,
            sol.deviation()
        ),
    ))
}

fn contraction(ctx: &Context) -> Check {
    let mut rows = Vec::new();
    let mut ok = true;
    for eps in EPS_LADDER {
        let sol = ctx.solver.solve(eps)?;
        let q = sol.report.ratios.iter().cloned().fold(0.0, f64::max);
        ok &= q < 0.5 && sol.report.residual <= 1e-8;
        rows.push(format!(
            "{eps:e}: q={q:.1e} res={:.1e}",
            sol.report.residual
        ));
    }
    Ok((
        ok,
        format!("ratios < 0.5, residual <= 1e-8; {}", rows.join(", ")),
    ))
}

fn deviation_scaling(ctx: &Context) -> Check {
    let c: Vec<f64> = EPS_LADDER
        .iter()
        .map(|&eps| Ok(ctx.solver.solve(eps)?.deviation() / eps))
        .collect::<Result<_>>()?;
    let (lo, hi) = c
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(a, b), &x| (a.min(x), b.max(x)));
    Ok((
        hi <= 1.1 * lo,
        format!("|Theta - theta|/eps in [{lo:.4}, {hi:.4}] (spread <= 10%)"),
    ))
}

fn first_order_law(ctx: &Context) -> Check {
    let h = ctx.solver.first_order();
    let gap = |eps: f64| -> Result<f64> { Ok(sup_norm(&ctx.solver.solve(eps)?.w.sub(&h))) };
    let q = gap(5e-4)? / gap(1e-3)?;
    Ok((
        (0.4..=0.6).contains(&q),
        format!("gap ratio eps 1e-3 -> 5e-4 = {q:.3} (in [0.4, 0.6])"),
    ))
}

fn gradient(ctx: &Context) -> Check {
    let sol = ctx.solver.solve(1e-3)?;
    let xi1 = sol.profile().xi1;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let (r, z) = (rng.gen_range(0.05..1.9) * xi1, rng.gen_range(-0.95..0.95));
        let (gr, gz) = sol.eval_grad_theta(r, z);
        let h = 1e-5;
        let fr = (sol.eval_theta(r + h, z) - sol.eval_theta(r - h, z)) / (2.0 * h);
        let fz = (sol.eval_theta(r, z + h) - sol.eval_theta(r, z - h)) / (2.0 * h);
        worst = worst.max((gr - fr).abs()).max((gz - fz).abs());
    }
    Ok((
        worst <= 1e-6,
        format!("max gradient vs finite differences = {worst:.1e} (<= 1e-6)"),
    ))
}

fn surface_vacuum(ctx: &Context) -> Check {
    let sol = ctx.solver.solve(1e-3)?;
    let prof = surface_profile(&sol, 17)?;
    let delta = 1e-3 * prof.reference_radius;
    let mut ok = prof.sigma > 0.0 && prof.normal_derivs.iter().all(|&n| n < 0.0);
    for (&z, &x) in prof.zeta_samples.iter().zip(&prof.xi1_values) {
        ok &= sol.eval_theta(x - delta, z) > 0.0 && sol.eval_theta(x + delta, z) < 0.0;
    }
    let worst = prof
        .normal_derivs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((
        ok,
        format!(
            "sign changes at all 17 roots, max dTheta/dN = {worst:.4e}, sigma = {:.4e}",
            prof.sigma
        ),
    ))
}

fn oblateness(ctx: &Context) -> Check {
    let eps = 5e-4;
    let sol = ctx.solver.solve(eps)?;
    let sigma = surface_profile(&sol, 3)?.sigma;
    let sigma1 = frak_h(sol.profile())?.sigma1();
    let q = sigma / (eps * sigma1);
    Ok((
        (q - 1.0).abs() <= 0.05,
        format!("sigma/(eps sigma1) at eps = 5e-4 = {q:.4} (within 5%)"),
    ))
}

fn pole(ctx: &Context) -> Check {
    let sol = ctx.solver.solve(1e-3)?;
    let v: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&z| Ok(pole_slope(&sol, z)?.proxy.abs()))
        .collect::<Result<_>>()?;
    let top = find_xi1(&sol, 1.0)?;
    Ok((
        v[0] > v[1] && v[1] > v[2],
        format!(
            "|proxy| at 0.9/0.99/0.999 = {:.3e}/{:.3e}/{:.3e}, Xi1(1) = {top:.4}",
            v[0], v[1], v[2]
        ),
    ))
}

fn snapshot_round_trip(ctx: &Context) -> Check {
    let sol = ctx.solver.solve(1e-3)?;
    let snap = SolutionSnapshot::from_solution(&sol, None);
    let text = snap.to_json()?;
    let back = SolutionSnapshot::from_json(&text)?;
    let same = back.to_json()? == text;
    let d = (back.restore()?.residual() - snap.report.residual).abs();
    Ok((
        same && d <= 1e-12,
        format!("byte-identical = {same}, recomputed residual differs by {d:.1e}"),
    ))
}

fn solver_reuse(ctx: &Context) -> Check {
    let a = ctx.solver.solve(1e-3)?;
    let b = ctx.solver.solve(1e-3)?;
    let same = a.w.values() == b.w.values();
    Ok((same, format!("repeated solves identical = {same}")))
}

type Plain = fn(&SolverConfig) -> Check;
type WithSolver = fn(&Context) -> Check;

const PLAIN: [(&str, Plain); 18] = [
    ("lane-emden nu=1 radius and mass", linear_radius),
    ("lane-emden nu=1 profile", linear_profile),
    ("lane-emden nu=5 closed form", index_five_profile),
    ("lane-emden nu=5 no finite zero", index_five_no_zero),
    ("mass identity", mass_identity),
    ("harmonic extension", extension),
    ("milne ratio increasing", milne_ratio),
    ("kovetz bound below 6", kovetz_bound),
    ("kovetz reference table", kovetz_table),
    ("integral identity", q_identity),
    ("mode functional positive", mode_functional),
    ("mode solutions increasing", mode_monotone),
    ("kernel vs trapezoid", kernel_trapezoid),
    ("kernel vs multipole series", kernel_multipole),
    ("uniform ball potential", uniform_ball),
    ("direct vs multipole potential", direct_vs_multipole),
    ("spherical fixed point", theta_fixed_point),
    ("first-order signs", chandrasekhar_signs),
];

const SOLVER: [(&str, WithSolver); 14] = [
    ("resolvent conditioning", resolvent_condition),
    ("resolvent inverts 1 - DG", resolvent_inverse),
    ("resolvent vs first-order response", resolvent_first_order),
    ("resolvent high modes vanish", resolvent_high_modes),
    ("zero rotation", zero_rotation),
    ("contraction", contraction),
    ("deviation linear in eps", deviation_scaling),
    ("first-order law", first_order_law),
    ("gradient vs finite differences", gradient),
    ("surface and vacuum", surface_vacuum),
    ("oblateness vs first order", oblateness),
    ("pole regularity", pole),
    ("snapshot round trip", snapshot_round_trip),
    ("solver state reuse", solver_reuse),
];

fn record(out: &mut Vec<Property>, name: &'static str, informational: bool, r: Check) {
    let (status, detail) = match r {
        Ok((_, d)) if informational => (Status::Info, d),
        Ok((true, d)) => (Status::Pass, d),
        Ok((false, d)) => (Status::Fail, d),
        Err(e) => (Status::Fail, format!("error: {e:#}")),
    };
    out.push(Property {
        name,
        status,
        detail,
    });
}

/// Runs every property; `quick` skips the direct-quadrature cross-check.
pub fn run_properties(c: &SolverConfig, quick: bool) -> Vec<Property> {
    let mut out = Vec::new();
    for (name, check) in PLAIN {
        if quick && name == "direct vs multipole potential" {
            out.push(Property {
                name,
                status: Status::Skip,
                detail: "skipped (--quick)".into(),
            });
        } else {
            record(&mut out, name, name == "kovetz reference table", check(c));
        }
    }
    match Context::new(c) {
        Ok(ctx) => {
            for (name, check) in SOLVER {
                record(&mut out, name, false, check(&ctx));
            }
        }
        Err(e) => {
            for (name, _) in SOLVER {
                record(
                    &mut out,
                    name,
                    false,
                    Err(anyhow::anyhow!("solver setup failed: {e:#}")),
                );
            }
        }
    }
    out
}

/// Prints the table and returns whether no property failed.
pub fn report(props: &[Property]) -> bool {
    for p in props {
        let tag = match p.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
            Status::Skip => "SKIP",
        };
        println!("{tag}  {:<36} {}", p.name, p.detail);
    }
    let count = |s| props.iter().filter(|p| p.status == s).count();
    let failed = count(Status::Fail);
    println!(
        "{} properties: {} passed, {failed} failed, {} info, {} skipped",
        props.len(),
        count(Status::Pass),
        count(Status::Info),
        count(Status::Skip)
    );
    failed == 0
}
