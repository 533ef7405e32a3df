use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rotstar_core::spectral_grid::GridFunction;
use rotstar_core::{DistortedSolution, IterationReport, Solver, SolverConfig, SurfaceProfile};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to rebuild a solution without re-iterating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionSnapshot {
    pub schema_version: u32,
    pub config: SolverConfig,
    pub nu: f64,
    pub eps: f64,
    pub xi1: f64,
    pub mu1: f64,
    pub r0: f64,
    pub radial_nodes: Vec<f64>,
    /// The ζ ≥ 0 half of the angular nodes; values are even in ζ.
    pub angular_nodes: Vec<f64>,
    /// w at (radial, angular) nodes, radial index outermost.
    pub w: Vec<f64>,
    /// Legendre modes j = 0, 2, …, J_max of Θ♯^ν at the radial nodes.
    pub source_modes: Vec<Vec<f64>>,
    pub report: IterationReport,
    pub deviation: f64,
    pub surface: Option<SurfaceProfile>,
}

impl SolutionSnapshot {
    pub fn from_solution(sol: &DistortedSolution, surface: Option<SurfaceProfile>) -> Self {
        let grid = sol.grid();
        let p = sol.profile();
        Self {
            schema_version: SCHEMA_VERSION,
            config: sol.config.clone(),
            nu: sol.nu,
            eps: sol.eps,
            xi1: p.xi1,
            mu1: p.mu1,
            r0: grid.radial.r0,
            radial_nodes: grid.radial.nodes.clone(),
            angular_nodes: grid.angular.half_nodes().to_vec(),
            w: sol.w.values().to_vec(),
            source_modes: sol.theta_source.clone().into_modes(),
            report: sol.report.clone(),
            deviation: sol.deviation(),
            surface,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).context("snapshot is not valid JSON")?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => bail!("unsupported snapshot schema_version {v} (expected {SCHEMA_VERSION})"),
            None => bail!("snapshot has no schema_version"),
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading snapshot {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("loading snapshot {}", path.display()))
    }

    /// Rebuilds the operators from the stored config and reattaches w.
    pub fn restore(&self) -> Result<DistortedSolution> {
        let solver = Solver::new(&self.config)?;
        let grid = solver.grid();
        ensure!(
            grid.radial.nodes == self.radial_nodes
                && grid.angular.half_nodes() == self.angular_nodes,
            "snapshot grid does not match the grid rebuilt from its config"
        );
        let w = GridFunction::from_values(grid, self.w.clone())?;
        Ok(DistortedSolution::from_parts(
            &solver,
            self.eps,
            w,
            self.report.clone(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snapshot(eps: f64) -> SolutionSnapshot {
        let config = SolverConfig {
            inner_panels: 4,
            outer_panels: 2,
            ..Default::default()
        };
        let sol = Solver::new(&config).unwrap().solve(eps).unwrap();
        SolutionSnapshot::from_solution(&sol, None)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let s = snapshot(1e-3);
        let text = s.to_json().unwrap();
        let back = SolutionSnapshot::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn restored_residual_matches() {
        let s = snapshot(1e-3);
        let sol = s.restore().unwrap();
        assert!((sol.residual() - s.report.residual).abs() <= 1e-12);
        assert_eq!(sol.deviation(), s.deviation);
    }

    #[test]
    fn schema_version_is_checked() {
        let mut v: serde_json::Value =
            serde_json::from_str(&snapshot(0.0).to_json().unwrap()).unwrap();
        v["schema_version"] = 2.into();
        let err = SolutionSnapshot::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("schema_version 2"));
    }
}
