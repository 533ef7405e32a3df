use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rotstar_core::lane_emden::{integrate_lane_emden, kovetz_sup_trajectory};
use rotstar_core::perturbation::frak_h;
use rotstar_core::surface::surface_profile;
use rotstar_core::{solve_lane_emden, Error, Solver};
use serde_json::json;

use crate::args::ConfigArgs;
use crate::snapshot::SolutionSnapshot;

/// Published supremum values to compare against.
const REFERENCE_TABLE: [(f64, f64); 6] = [
    (1.0, 9.9),
    (2.0, 1.8),
    (2.5, 2.3),
    (3.0, 4.0),
    (4.0, 3.8),
    (5.0, 2.8),
];

/// Radius up to which indices without a finite zero are scanned.
const OPEN_PROFILE_RADIUS: f64 = 100.0;

/// CSV number format: 17 significant digits, no locale.
pub fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sample_points(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        bail!(Error::Config(format!("need at least 2 samples (got {n})")));
    }
    Ok((0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect())
}

pub fn lane_emden(config: &ConfigArgs, samples: usize, output: Option<&Path>) -> Result<()> {
    let c = config.resolve()?;
    let p = solve_lane_emden(c.nu, c.le_tol)?;
    let (m_bar, _) = p.kovetz_sup();
    let mut csv = String::from("r,theta,dtheta\n");
    for r in sample_points(0.0, c.r0_factor * p.xi1, samples)? {
        writeln!(
            csv,
            "{},{},{}",
            num(r),
            num(p.eval_theta(r)),
            num(p.eval_dtheta(r))
        )?;
    }
    let footer = format!(
        "# xi1={},mu1={},m_bar={}\n",
        num(p.xi1),
        num(p.mu1),
        num(m_bar)
    );
    csv.push_str(&footer);
    emit(output, &csv)?;
    if output.is_some() {
        print!("{footer}");
    }
    Ok(())
}

pub fn kovetz(nu_list: &[f64], config: &ConfigArgs, output: Option<&Path>) -> Result<()> {
    let c = config.resolve()?;
    let mut csv = String::from("nu,m_bar,r1,below_6,reference,status,note\n");
    for &nu in nu_list {
        let reference = REFERENCE_TABLE.iter().find(|(n, _)| *n == nu).map(|t| t.1);
        let (sup, status) = match solve_lane_emden(nu, c.le_tol) {
            Ok(p) => (Some(p.kovetz_sup()), "ok".to_string()),
            Err(Error::NoFiniteZero { .. }) => {
                let traj = integrate_lane_emden(nu, c.le_tol, OPEN_PROFILE_RADIUS)?;
                (
                    Some(kovetz_sup_trajectory(&traj)),
                    "no_finite_zero".to_string(),
                )
            }
            Err(e) => (None, format!("error: {}", e.to_string().replace(',', ";"))),
        };
        let (m, r1) = sup.map_or((String::new(), String::new()), |(m, r)| (num(m), num(r)));
        let below = sup.map_or(String::new(), |(m, _)| (m < 6.0).to_string());
        let mut notes = Vec::new();
        if nu == 5.0 {
            notes.push("closed form 15/4".to_string());
        }
        if let (Some((m, _)), Some(t)) = (sup, reference) {
            if (m - t).abs() > 0.1 {
                notes.push(format!("differs from reference {t} by {:.3}", m - t));
            }
        }
        let reference = reference.map_or(String::new(), |t| t.to_string());
        writeln!(
            csv,
            "{nu},{m},{r1},{below},{reference},{status},{}",
            notes.join("; ")
        )?;
    }
    emit(output, &csv)
}

fn sweep_path(base: &Path, k: usize) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_{k}{ext}"))
}

pub fn solve(
    config: &ConfigArgs,
    eps: Option<f64>,
    samples: Option<usize>,
    output: Option<&Path>,
) -> Result<()> {
    let c = config.resolve()?;
    let eps_list = match (eps, &c.eps_list) {
        (Some(e), _) => vec![e],
        (None, Some(list)) if !list.is_empty() => list.clone(),
        _ => bail!("no --eps given and the config has no eps_list"),
    };
    let solver = Solver::new(&c)?;
    for (k, &eps) in eps_list.iter().enumerate() {
        let sol = solver.solve(eps)?;
        let surface = match samples {
            Some(n) => Some(surface_profile(&sol, n)?),
            None => None,
        };
        let snap = SolutionSnapshot::from_solution(&sol, surface);
        println!(
            "nu={} eps={} iterations={} residual={} deviation={}{}",
            sol.nu,
            eps,
            snap.report.iterations,
            num(snap.report.residual),
            num(snap.deviation),
            snap.surface
                .as_ref()
                .map_or(String::new(), |s| format!(" sigma={}", num(s.sigma)))
        );
        if let Some(base) = output {
            let path = if eps_list.len() == 1 {
                base.to_path_buf()
            } else {
                sweep_path(base, k)
            };
            snap.save(&path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

pub fn surface(snapshot: &Path, samples: usize, output: Option<&Path>) -> Result<()> {
    let sol = SolutionSnapshot::load(snapshot)?.restore()?;
    let prof = surface_profile(&sol, samples)?;
    let mut csv = String::from("zeta,xi1,dxi1_dzeta,dtheta_dn\n");
    for k in 0..prof.zeta_samples.len() {
        writeln!(
            csv,
            "{},{},{},{}",
            num(prof.zeta_samples[k]),
            num(prof.xi1_values[k]),
            num(prof.dxi1_dzeta[k]),
            num(prof.normal_derivs[k])
        )?;
    }
    let footer = format!("# sigma={}\n", num(prof.sigma));
    csv.push_str(&footer);
    emit(output, &csv)?;
    if output.is_some() {
        print!("{footer}");
    }
    Ok(())
}

pub fn chandrasekhar(config: &ConfigArgs, samples: usize, output: Option<&Path>) -> Result<()> {
    let c = config.resolve()?;
    let p = solve_lane_emden(c.nu, c.le_tol)?;
    let f = frak_h(&p)?;
    let r = sample_points(0.0, p.xi1, samples)?;
    let doc = json!({
        "nu": p.nu,
        "xi1": p.xi1,
        "mu1": p.mu1,
        "r": r,
        "h0": r.iter().map(|&x| f.h0.h0(x)).collect::<Vec<_>>(),
        "psi2": r.iter().map(|&x| f.psi2.psi(x)).collect::<Vec<_>>(),
        "A2": f.a2(),
        "C2": f.quadrupole.c2,
        "matching_residual": f.quadrupole.matching_residual,
        "sigma1": f.sigma1(),
    });
    emit(output, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_17_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(-0.0), "0.0000000000000000e0");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn sweep_paths_keep_extension() {
        assert_eq!(
            sweep_path(Path::new("/tmp/sol.json"), 2),
            Path::new("/tmp/sol_2.json")
        );
    }
}
