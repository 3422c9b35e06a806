use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use blade_core::bpmn::BpmnError;
use blade_core::mcdm::EvaluateError;
use blade_core::perfsim::SimError;
use blade_core::requirements::{Finding, RequirementsError};
use serde::Serialize;

/// Machine-readable error codes. This set is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Body or query could not be decoded. 400.
    MalformedRequest,
    /// Requirements parsed but are inconsistent with the KB. 422.
    ValidationFailed,
    /// Requirements document violates its own invariants. 422.
    InvalidRequirements,
    /// Ranking could not be computed for well-formed input. 422.
    EvaluationFailed,
    /// Process model rejected. 422.
    InvalidProcess,
    /// Simulation inputs rejected. 422.
    InvalidSimulation,
    /// Referenced profile does not exist. 404.
    UnknownProfile,
    /// No such route. 404.
    NotFound,
    /// Unexpected server failure. 500.
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            Self::MalformedRequest => StatusCode::BAD_REQUEST,
            Self::ValidationFailed
            | Self::InvalidRequirements
            | Self::EvaluationFailed
            | Self::InvalidProcess
            | Self::InvalidSimulation => StatusCode::UNPROCESSABLE_ENTITY,
            Self::UnknownProfile | Self::NotFound => StatusCode::NOT_FOUND,
            Self::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub status: u16,
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub findings: Option<Vec<Finding>>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            status: code.status().as_u16(),
            code,
            message: message.into(),
            findings: None,
        }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::MalformedRequest, message)
    }

    pub fn validation(findings: Vec<Finding>) -> Self {
        let message = findings
            .iter()
            .map(|f| f.message.as_str())
            .collect::<Vec<_>>()
            .join("; ");
        ApiError {
            findings: Some(findings),
            ..Self::new(ErrorCode::ValidationFailed, message)
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (
            status,
            [(header::CONTENT_TYPE, "application/json")],
            blade_core::json::to_body(&self),
        )
            .into_response()
    }
}

impl From<RequirementsError> for ApiError {
    fn from(e: RequirementsError) -> Self {
        match e {
            RequirementsError::Malformed(_) => Self::malformed(e.to_string()),
            _ => Self::new(ErrorCode::InvalidRequirements, e.to_string()),
        }
    }
}

impl From<EvaluateError> for ApiError {
    fn from(e: EvaluateError) -> Self {
        match e {
            EvaluateError::Validation(findings) => Self::validation(findings),
            other => Self::new(ErrorCode::EvaluationFailed, other.to_string()),
        }
    }
}

impl From<BpmnError> for ApiError {
    fn from(e: BpmnError) -> Self {
        match e {
            BpmnError::MalformedXml(_) => Self::malformed(e.to_string()),
            other => Self::new(ErrorCode::InvalidProcess, other.to_string()),
        }
    }
}

impl From<SimError> for ApiError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::UnknownProfile(_) => Self::new(ErrorCode::UnknownProfile, e.to_string()),
            SimError::Kb(_) => Self::new(ErrorCode::Internal, e.to_string()),
            other => Self::new(ErrorCode::InvalidSimulation, other.to_string()),
        }
    }
}
