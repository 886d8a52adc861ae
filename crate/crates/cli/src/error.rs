//! Error type carrying the process exit code contract:
//! 0 success, 2 config error, 3 numerical refusal, 4 DSL error.

use hierpop::{EquilibriumError, NumericsError, RateError, SimError, SpectrumError};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or invalid configuration (exit 2).
    Config,
    /// Numerical refusal: CFL violation, non-bracketing search, positivity
    /// refusal, absent equilibrium (exit 3).
    Refusal,
    /// Expression parse or evaluation failure (exit 4).
    Dsl,
    /// Anything else, typically I/O (exit 1).
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Refusal => 3,
            ErrorKind::Dsl => 4,
            ErrorKind::Internal => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: String) -> CliError {
        CliError { kind, message }
    }

    pub fn with_context(mut self, ctx: &str) -> CliError {
        self.message = format!("{ctx}: {}", self.message);
        self
    }

    pub fn from_rate(e: RateError) -> CliError {
        let kind = match &e {
            RateError::Parse { .. } | RateError::Eval { .. } => ErrorKind::Dsl,
            _ => ErrorKind::Config,
        };
        CliError::new(kind, e.to_string())
    }

    pub fn from_numerics(e: NumericsError) -> CliError {
        let kind = match &e {
            NumericsError::NonBracketing { .. } | NumericsError::NanValue(_) => ErrorKind::Refusal,
            _ => ErrorKind::Internal,
        };
        CliError::new(kind, e.to_string())
    }

    pub fn from_equilibrium(e: EquilibriumError) -> CliError {
        match e {
            EquilibriumError::Rate(r) => CliError::from_rate(r),
            EquilibriumError::Numerics(n) => CliError::from_numerics(n),
            EquilibriumError::NonPositiveGamma { .. } => {
                CliError::new(ErrorKind::Config, e.to_string())
            }
            EquilibriumError::DegenerateSurvivorship => {
                CliError::new(ErrorKind::Refusal, e.to_string())
            }
            EquilibriumError::BadSearchBound(_) => CliError::new(ErrorKind::Config, e.to_string()),
        }
    }

    pub fn from_spectrum(e: SpectrumError) -> CliError {
        match e {
            SpectrumError::Rate(r) => CliError::from_rate(r),
            SpectrumError::Numerics(n) => CliError::from_numerics(n),
            SpectrumError::PositivityUnverified { .. } => {
                CliError::new(ErrorKind::Refusal, e.to_string())
            }
            other => CliError::new(ErrorKind::Internal, other.to_string()),
        }
    }

    pub fn from_sim(e: SimError) -> CliError {
        match e {
            SimError::Rate(r) => CliError::from_rate(r),
            SimError::Numerics(n) => CliError::from_numerics(n),
            SimError::HistoryEval { .. } => CliError::new(ErrorKind::Dsl, e.to_string()),
            SimError::CflViolation { .. }
            | SimError::NegativeDensity { .. }
            | SimError::RecruitmentFeedback(_)
            | SimError::FitWindowTooSmall { .. }
            | SimError::FitWindowUnreliable => CliError::new(ErrorKind::Refusal, e.to_string()),
            _ => CliError::new(ErrorKind::Config, e.to_string()),
        }
    }

    pub fn io(e: std::io::Error, what: &str) -> CliError {
        CliError::new(ErrorKind::Internal, format!("{what}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
