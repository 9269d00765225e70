//! Config-driven runs of the figure scenarios, CSV and manifest output,
//! parameter sweeps and the named invariant suite.

mod config;
mod output;
mod run;
mod sweep;
mod verify;

pub use config::{parse_override, ScenarioConfig, ScenarioKind};
pub use output::{
    fmt_float, resolve_output_dir, trajectory_header, CheckResult, RunManifest, Table,
    OUTPUT_DIR_ENV,
};
pub use run::{
    convergence_speeds, least_squares, measurement_coefficients, run, simulate, ConvergenceSpeeds,
    RunOutput, CONSTRAINT_FLOOR, DILATION_CHECKS, HERMITICITY_TOL, NORM_DRIFT_TOL, PROB_SUM_TOL,
};
pub use sweep::{parse_values, sweep, SweepPoint, SweepReport};
pub use verify::{verify, VerifyReport, CHECKS};

use crate::error::Error;

/// Process exit status for the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Invariant = 2,
    Numerical = 3,
}

impl ExitStatus {
    /// Configuration and I/O problems are usage errors; constraint and
    /// Hermiticity breaches are invariant failures; everything else is a
    /// numerical-contract failure.
    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::Config { .. } | Error::Io(_) | Error::InvalidInput(_) => ExitStatus::Usage,
            Error::ConstraintViolation { .. }
            | Error::NearSingularEta { .. }
            | Error::InternalConsistency(_)
            | Error::NotHermitian { .. } => ExitStatus::Invariant,
            _ => ExitStatus::Numerical,
        }
    }

    pub fn code(self) -> i32 {
        self as i32
    }
}
