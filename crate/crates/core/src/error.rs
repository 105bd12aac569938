use thiserror::Error;

/// Errors produced by the library and surfaced by the CLI with distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    /// An exhaustive oracle would need more work items than the configured cap.
    #[error("enumeration too large: {what} needs {needed} items, cap is {cap}{hint}")]
    TooLarge {
        what: String,
        needed: f64,
        cap: u64,
        hint: &'static str,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("plan infeasible: {0}")]
    PlanInfeasible(String),

    #[error("model unsupported: {0}")]
    ModelUnsupported(String),

    #[error("certification violated: {0}")]
    CertificationViolated(String),

    #[error("construction failed after {attempts} attempts: {detail}")]
    ConstructionFailed { attempts: u32, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn too_large(what: impl Into<String>, needed: f64, cap: u64, hint: &'static str) -> Self {
        Error::TooLarge {
            what: what.into(),
            needed,
            cap,
            hint,
        }
    }

    /// Process exit code used by the CLI: 2 input, 3 cap/resource, 4 certification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse(_) | Error::PlanInfeasible(_) | Error::ModelUnsupported(_) => 2,
            Error::TooLarge { .. } | Error::Numeric(_) | Error::Io(_) => 3,
            Error::CertificationViolated(_) | Error::ConstructionFailed { .. } => 4,
        }
    }
}
