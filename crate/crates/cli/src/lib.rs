//! Library side of the `krc` binary: problem files, commands and reports.
//!
//! Exit codes: 0 success, 1 mathematical failure (untight cost, duality gap,
//! violated bound or certificate, invalid objects under `validate`), 2 input
//! error.

pub mod args;
pub mod certify;
pub mod commands;
pub mod problem;
pub mod report;

pub use args::{Cli, Command, Common};
pub use commands::{execute, Outcome};
pub use problem::{Problem, ProblemFile};
pub use report::{render_text, Report, Results};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Math(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Math(_) => 1,
        }
    }

    pub(crate) fn context(self, path: &str) -> Self {
        match self {
            Self::Input(m) => Self::Input(format!("{path}: {m}")),
            Self::Math(m) => Self::Math(format!("{path}: {m}")),
        }
    }
}

impl From<krc::Error> for CliError {
    fn from(e: krc::Error) -> Self {
        use krc::Error as E;
        match e {
            E::UntightCost { .. } => Self::Math(format!("{e}; rerun with --closure to use the shortest-path closure")),
            E::DualityGapExceeded { .. } | E::NumericalFailure(_) => {
                Self::Math(e.to_string())
            }
            _ => Self::Input(e.to_string()),
        }
    }
}
