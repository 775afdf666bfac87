use std::fmt;

use complin_core::pipeline::PipelineError;
use complin_core::solve::SolveError;
use complin_core::verify::VerifyError;

use crate::report::Report;

/// Process exit codes.
pub mod code {
    pub const OK: u8 = 0;
    /// Unreadable or malformed input: parse errors, bad flags, missing bindings.
    pub const INPUT: u8 = 2;
    /// Internal inconsistency, including unwritable outputs.
    pub const INTERNAL: u8 = 3;
    pub const NO_RECIPE: u8 = 4;
    /// Newton divergence, branch ambiguity, or no starting root.
    pub const NEWTON: u8 = 5;
    /// Verification failed or exceeded its tolerance.
    pub const VERIFY: u8 = 6;
}

pub struct CliError {
    pub code: u8,
    pub message: String,
    /// Partial report to write before exiting.
    pub report: Option<Box<Report>>,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into(), report: None }
    }

    pub fn with_report(mut self, report: Report) -> Self {
        self.report = Some(Box::new(report));
        self
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError::new(code::INPUT, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError::new(code::INTERNAL, message)
    }
}

impl fmt::Debug for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CliError({}, {:?})", self.code, self.message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        let code = match &e {
            SolveError::NoRecipe(_)
            | SolveError::PatternMismatch(_)
            | SolveError::NotCubicFactorable
            | SolveError::TargetNotLinear(_)
            | SolveError::UnsupportedH(_)
            | SolveError::NonPolynomialCoefficients => code::NO_RECIPE,
            SolveError::NewtonDiverged { .. } | SolveError::BranchAmbiguity { .. } | SolveError::NoAnchor(_) | SolveError::Eval { .. } => {
                code::NEWTON
            }
            SolveError::MissingParameter(_) | SolveError::BadGrid | SolveError::OrderTooSmall(_) => code::INPUT,
            SolveError::CertificateFailed(_) | SolveError::Analyticity(_) | SolveError::Expr(_) => code::INTERNAL,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        let code = match &e {
            VerifyError::ComplexParameter(_) | VerifyError::InvalidStep { .. } | VerifyError::Csv(_) | VerifyError::TooFewColumns(_) => {
                code::INPUT
            }
            VerifyError::Io(_) | VerifyError::Json(_) => code::INTERNAL,
            _ => code::VERIFY,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Solve(e) => e.into(),
            PipelineError::Verify(e) => e.into(),
            PipelineError::Eval(e) => CliError::internal(e.to_string()),
        }
    }
}
