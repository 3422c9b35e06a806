use std::fmt;
use std::path::PathBuf;

use blade_core::bpmn::BpmnError;
use blade_core::kb::KbError;
use blade_core::mcdm::EvaluateError;
use blade_core::perfsim::SimError;
use blade_core::requirements::{Finding, RequirementsError};
use blade_core::stubgen::StubError;
use thiserror::Error;

/// Process exit status. The mapping from error to code is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Validation = 1,
    Format = 2,
    Internal = 3,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl fmt::Display for ExitCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("knowledge base {}: {source}", path.display())]
    Kb {
        path: PathBuf,
        #[source]
        source: KbError,
    },
    #[error(transparent)]
    Requirements(#[from] RequirementsError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error(transparent)]
    Bpmn(#[from] BpmnError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stub(#[from] StubError),
    #[error("requirements failed validation ({} finding(s))", .0.len())]
    Findings(Vec<Finding>),
    #[error("no platform survives the strict requirements")]
    NoSurvivors,
    #[error("cannot serve on {addr}: {source}")]
    Bind {
        addr: std::net::SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Io { .. } | CliError::Json { .. } | CliError::Kb { .. } | CliError::Bind { .. } => {
                ExitCode::Format
            }
            CliError::Requirements(RequirementsError::Malformed(_)) => ExitCode::Format,
            CliError::Bpmn(BpmnError::MalformedXml(_)) => ExitCode::Format,
            CliError::Stub(StubError::Io(_)) => ExitCode::Format,
            CliError::Sim(SimError::Kb(_)) | CliError::Internal(_) => ExitCode::Internal,
            CliError::Requirements(_)
            | CliError::Evaluate(_)
            | CliError::Bpmn(_)
            | CliError::Sim(_)
            | CliError::Stub(_)
            | CliError::Findings(_)
            | CliError::NoSurvivors => ExitCode::Validation,
        }
    }

    /// Individual findings to report after the headline, if any.
    pub fn findings(&self) -> &[Finding] {
        match self {
            CliError::Findings(f) | CliError::Evaluate(EvaluateError::Validation(f)) => f,
            _ => &[],
        }
    }
}
