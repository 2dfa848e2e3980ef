use std::fmt;

use metaforge_core::compiler::{ExportError, ValidationReport};
use metaforge_core::recommender::RecommendError;
use metaforge_core::tsv::TsvError;
use metaforge_core::{ModelError, ResolveError};

/// Every failure surfaced to API and CLI callers, by wire name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Code {
    Unauthenticated,
    PermissionDenied,
    NotFound,
    VersionConflict,
    InvalidPayload,
    ModelViolation,
    MalformedJson,
    InvalidRequest,
    AlreadyExists,
    MissingParent,
    CyclicMove,
    OwnerImmutable,
    Referenced,
    FolderNotEmpty,
    DuplicateMember,
    InvalidQuery,
    UnresolvedReference,
    CycleDetected,
    InvalidReference,
    ResolvedTooLarge,
    NoPropertyIri,
    Unserializable,
    TemplateMismatch,
    InvalidInstance,
    EmptyQuery,
    UnknownTerm,
    BranchTooLarge,
    DuplicateLabel,
    TerminologyUnavailable,
    ValidatorUnavailable,
    ValidatorMalformed,
    SubmissionUnavailable,
    SubmissionRejected,
    SubmissionBlocked,
    MissingCredential,
    UnknownTarget,
    Io,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Unauthenticated => "UNAUTHENTICATED",
            Code::PermissionDenied => "PERMISSION_DENIED",
            Code::NotFound => "NOT_FOUND",
            Code::VersionConflict => "VERSION_CONFLICT",
            Code::InvalidPayload => "INVALID_PAYLOAD",
            Code::ModelViolation => "MODEL_VIOLATION",
            Code::MalformedJson => "MALFORMED_JSON",
            Code::InvalidRequest => "INVALID_REQUEST",
            Code::AlreadyExists => "ALREADY_EXISTS",
            Code::MissingParent => "MISSING_PARENT",
            Code::CyclicMove => "CYCLIC_MOVE",
            Code::OwnerImmutable => "OWNER_IMMUTABLE",
            Code::Referenced => "REFERENCED",
            Code::FolderNotEmpty => "FOLDER_NOT_EMPTY",
            Code::DuplicateMember => "DUPLICATE_MEMBER",
            Code::InvalidQuery => "INVALID_QUERY",
            Code::UnresolvedReference => "UNRESOLVED_REFERENCE",
            Code::CycleDetected => "CYCLE_DETECTED",
            Code::InvalidReference => "INVALID_REFERENCE",
            Code::ResolvedTooLarge => "RESOLVED_TOO_LARGE",
            Code::NoPropertyIri => "NO_PROPERTY_IRI",
            Code::Unserializable => "UNSERIALIZABLE",
            Code::TemplateMismatch => "TEMPLATE_MISMATCH",
            Code::InvalidInstance => "INVALID_INSTANCE",
            Code::EmptyQuery => "EMPTY_QUERY",
            Code::UnknownTerm => "UNKNOWN_TERM",
            Code::BranchTooLarge => "BRANCH_TOO_LARGE",
            Code::DuplicateLabel => "DUPLICATE_LABEL",
            Code::TerminologyUnavailable => "TERMINOLOGY_UNAVAILABLE",
            Code::ValidatorUnavailable => "VALIDATOR_UNAVAILABLE",
            Code::ValidatorMalformed => "VALIDATOR_MALFORMED",
            Code::SubmissionUnavailable => "SUBMISSION_UNAVAILABLE",
            Code::SubmissionRejected => "SUBMISSION_REJECTED",
            Code::SubmissionBlocked => "SUBMISSION_BLOCKED",
            Code::MissingCredential => "MISSING_CREDENTIAL",
            Code::UnknownTarget => "UNKNOWN_TARGET",
            Code::Io => "IO_ERROR",
        }
    }

    pub fn http_status(self) -> u16 {
        match self {
            Code::Unauthenticated => 401,
            Code::PermissionDenied => 403,
            Code::NotFound => 404,
            Code::VersionConflict => 409,
            Code::InvalidPayload | Code::ModelViolation | Code::MalformedJson | Code::InvalidInstance => 422,
            Code::TerminologyUnavailable | Code::ValidatorUnavailable | Code::SubmissionUnavailable => 502,
            Code::Io => 500,
            _ => 400,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{code}: {message}")]
pub struct Error {
    pub code: Code,
    pub message: String,
    pub path: Option<String>,
    /// Extra structured body, e.g. the validation report of a rejected save.
    pub detail: Option<(&'static str, serde_json::Value)>,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Error {
            code,
            message: message.into(),
            path: None,
            detail: None,
        }
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn with_detail(mut self, key: &'static str, value: serde_json::Value) -> Self {
        self.detail = Some((key, value));
        self
    }

    pub fn not_found(what: impl fmt::Display) -> Self {
        Error::new(Code::NotFound, format!("{what} not found"))
    }

    pub fn denied() -> Self {
        Error::new(Code::PermissionDenied, "insufficient permission")
    }

    pub fn invalid_instance(report: &ValidationReport) -> Self {
        let body = serde_json::to_value(report.to_json()).unwrap_or_default();
        Error::new(
            Code::InvalidInstance,
            format!("instance has {} validation error(s)", report.errors.len()),
        )
        .with_detail("report", body)
    }

    /// `{"error", "message", "path"?, ...detail}`.
    pub fn body(&self) -> serde_json::Value {
        let mut o = serde_json::Map::new();
        o.insert("error".into(), self.code.as_str().into());
        o.insert("message".into(), self.message.clone().into());
        if let Some(p) = &self.path {
            o.insert("path".into(), p.clone().into());
        }
        if let Some((k, v)) = &self.detail {
            o.insert((*k).into(), v.clone());
        }
        serde_json::Value::Object(o)
    }
}

impl From<ModelError> for Error {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::MalformedJson { .. } => Code::MalformedJson,
            ModelError::Violation { .. } => Code::ModelViolation,
        };
        let mut out = Error::new(code, e.message());
        out.path = e.path().map(String::from);
        out
    }
}

impl From<ResolveError> for Error {
    fn from(e: ResolveError) -> Self {
        let code = match &e {
            ResolveError::UnresolvedReference { .. } => Code::UnresolvedReference,
            ResolveError::CycleDetected { .. } => Code::CycleDetected,
            ResolveError::InvalidReference { .. } => Code::InvalidReference,
            ResolveError::DuplicateName { .. } => Code::ModelViolation,
            ResolveError::TooLarge { .. } => Code::ResolvedTooLarge,
        };
        let mut out = Error::new(code, e.to_string());
        out.path = e.path().map(String::from);
        if let ResolveError::CycleDetected { cycle } = &e {
            let ids: Vec<serde_json::Value> = cycle.iter().map(|i| i.as_str().into()).collect();
            out = out.with_detail("cycle", ids.into());
        }
        out
    }
}

impl From<ExportError> for Error {
    fn from(e: ExportError) -> Self {
        Error::new(Code::NoPropertyIri, e.to_string()).at(e.path())
    }
}

impl From<TsvError> for Error {
    fn from(e: TsvError) -> Self {
        let TsvError::Unserializable { path } = &e;
        Error::new(Code::Unserializable, e.to_string()).at(path.clone())
    }
}

impl From<RecommendError> for Error {
    fn from(e: RecommendError) -> Self {
        Error::new(Code::TemplateMismatch, e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::new(Code::Io, e.to_string())
    }
}
