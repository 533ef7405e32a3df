use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rotstar_core::SolverConfig;

#[derive(Debug, Parser)]
#[command(
    name = "rotstar",
    version,
    about = "Slowly rotating polytropic equilibria"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the Lane-Emden profile θ, θ' on [0, R₀].
    LaneEmden {
        #[command(flatten)]
        config: ConfigArgs,
        /// Number of sample radii.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// CSV output path (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tabulate sup νθ^{ν−1}r² over [0, ξ₁] for a list of indices.
    Kovetz {
        /// Comma-separated polytropic indices.
        #[arg(long, value_delimiter = ',', default_value = "1,2,2.5,3,4,5")]
        nu_list: Vec<f64>,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve for the rotating equilibrium and write a JSON snapshot.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Rotation parameter ε = 2Ω² (defaults to eps_list from --config).
        #[arg(long)]
        eps: Option<f64>,
        /// Also compute the surface with this many ζ samples.
        #[arg(long)]
        samples: Option<usize>,
        /// Snapshot path; with several ε values, `_<k>` is appended to the stem.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Free boundary, its slope and normal derivative from a snapshot.
    Surface {
        /// Snapshot written by `solve`.
        snapshot: PathBuf,
        #[arg(long, default_value_t = 33)]
        samples: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// First-order rotational response and oblateness coefficient as JSON.
    Chandrasekhar {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 41)]
        samples: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the numerical property suite.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Skip the direct-quadrature potential cross-check.
        #[arg(long)]
        quick: bool,
    },
}

/// Overrides applied on top of the defaults or a `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with SolverConfig fields.
    #[arg(long = "config", value_name = "JSON")]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Inner radial panels; the exterior gets half as many (at least one).
    #[arg(long)]
    pub panels: Option<usize>,
    /// Gauss nodes per radial panel.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub jmax: Option<usize>,
    #[arg(long)]
    pub angular_order: Option<usize>,
    #[arg(long)]
    pub fp_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub r0_factor: Option<f64>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then flags; the result is validated.
    pub fn resolve(&self) -> Result<SolverConfig> {
        let mut c = match &self.file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => SolverConfig::default(),
        };
        if let Some(nu) = self.nu {
            c.nu = nu;
        }
        if let Some(p) = self.panels {
            c.inner_panels = p;
            c.outer_panels = p.div_ceil(2).max(1);
        }
        if let Some(n) = self.nodes {
            c.panel_order = n;
        }
        if let Some(j) = self.jmax {
            c.j_max = j;
        }
        if let Some(a) = self.angular_order {
            c.angular_order = a;
        }
        if let Some(t) = self.fp_tol {
            c.fp_tol = t;
        }
        if let Some(m) = self.max_iter {
            c.max_iter = m;
        }
        if let Some(f) = self.r0_factor {
            c.r0_factor = f;
        }
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"nu": 2.0, "panel_order": 12, "fp_tol": 1e-9}"#).unwrap();
        let args = ConfigArgs {
            file: Some(path),
            nu: Some(2.5),
            panels: Some(3),
            ..Default::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!((c.nu, c.panel_order, c.fp_tol), (2.5, 12, 1e-9));
        assert_eq!((c.inner_panels, c.outer_panels), (3, 2));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let args = ConfigArgs {
            r0_factor: Some(1.0),
            ..Default::default()
        };
        assert!(args.resolve().is_err());
    }

    #[test]
    fn parses_nu_list() {
        let cli = Cli::try_parse_from(["rotstar", "kovetz", "--nu-list", "1,2.5,3"]).unwrap();
        match cli.command {
            Command::Kovetz { nu_list, .. } => assert_eq!(nu_list, vec![1.0, 2.5, 3.0]),
            other => panic!("{other:?}"),
        }
    }
}
