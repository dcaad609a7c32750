use std::io;

use thiserror::Error;
use westervelt_core::Error as CoreError;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Validation(CoreError),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("parabolicity violation at t = {t}: |u| = {value} at node {node}")]
    Parabolicity { t: f64, node: usize, value: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::Parabolicity { .. } => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidDomain(_)
            | CoreError::InvalidGrid(_)
            | CoreError::InvalidParams(_)
            | CoreError::InvalidConfig(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::TooManyModes { .. }
            | CoreError::NonPositiveCoefficient { .. }
            | CoreError::ParabolicityViolation { .. }
            | CoreError::SingularMu { .. } => CliError::Validation(e),
            CoreError::NoConvergence { .. }
            | CoreError::EigensolverFailure
            | CoreError::SingularMatrix { .. }
            | CoreError::SingularResolvent { .. }
            | CoreError::DegenerateFit(_) => CliError::Numerical(e),
        }
    }
}
