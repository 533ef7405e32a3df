use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid polytropic index {nu}: must be at least 1")]
    InvalidIndex { nu: f64 },

    #[error("Lane-Emden solution stays positive up to r_max = {r_max}; no finite first zero")]
    NoFiniteZero { r_max: f64 },

    #[error("radius {r} outside [0, {limit})")]
    OutOfDomain { r: f64, limit: f64 },

    #[error("integration tolerance {tol} outside [1e-14, 1e-4]")]
    InvalidTolerance { tol: f64 },

    #[error("step size underflow while integrating near r = {r}")]
    StepSizeUnderflow { r: f64 },

    #[error("kernel evaluated at coincident points (r = {r}, zeta = {zeta})")]
    CoincidentPoints { r: f64, zeta: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linearized system for mode {j} is numerically singular; refine the radial grid")]
    SingularMode { j: usize },

    #[error("mode index {j} must be even and at least 2")]
    InvalidMode { j: usize },

    #[error("degenerate exterior matching (denominator {denominator:e})")]
    DegenerateMatching { denominator: f64 },

    #[error("iteration is not contracting (iteration {iteration}, ratio {ratio:.3e}); reduce eps")]
    NotContracting { iteration: usize, ratio: f64 },

    #[error("no convergence after {max_iter} iterations (last difference {last_diff:e})")]
    MaxIterExceeded { max_iter: usize, last_diff: f64 },

    #[error("surface root not bracketed in [{lo}, {hi}] at zeta = {zeta}")]
    NoBracket { zeta: f64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
