//! Command-line layer: configuration, CSV/JSON output, snapshots and the
//! validation suite.

pub mod args;
pub mod commands;
pub mod snapshot;
pub mod validate;

use anyhow::Result;
use rotstar_core::Error;

pub use args::{Cli, Command, ConfigArgs};
pub use snapshot::SolutionSnapshot;

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::LaneEmden {
            config,
            samples,
            output,
        } => commands::lane_emden(&config, samples, output.as_deref())?,
        Command::Kovetz {
            nu_list,
            config,
            output,
        } => commands::kovetz(&nu_list, &config, output.as_deref())?,
        Command::Solve {
            config,
            eps,
            samples,
            output,
        } => commands::solve(&config, eps, samples, output.as_deref())?,
        Command::Surface {
            snapshot,
            samples,
            output,
        } => commands::surface(&snapshot, samples, output.as_deref())?,
        Command::Chandrasekhar {
            config,
            samples,
            output,
        } => commands::chandrasekhar(&config, samples, output.as_deref())?,
        Command::Validate { config, quick } => {
            let c = config.resolve()?;
            let passed = validate::report(&validate::run_properties(&c, quick));
            return Ok(if passed { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// 2 invalid parameter, 3 no finite zero, 4 not contracting, 5 max
/// iterations; anything else (usage, I/O, format) is 1.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::NoFiniteZero { .. }) => 3,
        Some(Error::NotContracting { .. }) => 4,
        Some(Error::MaxIterExceeded { .. }) => 5,
        Some(_) => 2,
        None => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let code = |e: Error| exit_code(&anyhow::Error::new(e).context("while running"));
        assert_eq!(code(Error::InvalidIndex { nu: 0.5 }), 2);
        assert_eq!(code(Error::NoFiniteZero { r_max: 100.0 }), 3);
        assert_eq!(
            code(Error::NotContracting {
                iteration: 3,
                ratio: 2.0
            }),
            4
        );
        assert_eq!(
            code(Error::MaxIterExceeded {
                max_iter: 2,
                last_diff: 1.0
            }),
            5
        );
        assert_eq!(exit_code(&anyhow::anyhow!("missing file")), 1);
    }
}
