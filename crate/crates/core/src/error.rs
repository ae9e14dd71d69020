use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Numerator and denominator vanish together: the map has a common root there.
    #[error("indeterminate 0/0 at z = {re}{im:+}i (numerator and denominator share a root)")]
    Indeterminate { re: f64, im: f64 },

    #[error("root finder did not converge after {iterations} iterations (max residual {residual:e})")]
    RootsNotConverged { iterations: usize, residual: f64 },

    #[error("angle {angle} is preperiodic under multiplication by {degree} (preperiod {preperiod})")]
    PreperiodicAngle {
        angle: String,
        degree: u64,
        preperiod: usize,
    },

    #[error("angles do not form a rotation cycle: {0}")]
    NotRotationCycle(String),

    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NewtonNotConverged { iterations: usize, residual: f64 },

    /// The solver found a root, but the relation already holds for a smaller
    /// preperiod or a proper divisor of the period.
    #[error(
        "relation reduces: root {re}{im:+}i has preperiod {preperiod}, period {period}"
    )]
    ReducedRelation {
        re: f64,
        im: f64,
        preperiod: usize,
        period: usize,
    },

    #[error("flood-fill seed {re}{im:+}i is not a member of the sampled set")]
    SeedNotMember { re: f64, im: f64 },

    #[error("combinatorial inconsistency: {0}")]
    Combinatorial(String),

    #[error("orbit left the unit interval: x = {0}")]
    LeftInterval(f64),

    #[error("fit did not converge after {iterations} damped steps (residual {residual:e})")]
    FitNotConverged { iterations: usize, residual: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
