use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::id::ResourceId;

/// Failure to turn a document into a model value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// The text is not JSON.
    MalformedJson { message: String },
    /// JSON, but it breaks a model rule. `path` is a JSON Pointer into the document.
    Violation { path: String, message: String },
}

impl ModelError {
    pub(crate) fn violation(path: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Violation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ModelError::MalformedJson { .. } => "MALFORMED_JSON",
            ModelError::Violation { .. } => "MODEL_VIOLATION",
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            ModelError::MalformedJson { .. } => None,
            ModelError::Violation { path, .. } => Some(path),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            ModelError::MalformedJson { message } | ModelError::Violation { message, .. } => message,
        }
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::MalformedJson { message } => write!(f, "malformed JSON: {message}"),
            ModelError::Violation { path, message } => write!(f, "at `{path}`: {message}"),
        }
    }
}

#[cfg(feature = "std")]
extern crate std;
#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// Failure while inlining references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolveError {
    UnresolvedReference {
        path: String,
        id: ResourceId,
    },
    CycleDetected {
        cycle: Vec<ResourceId>,
    },
    /// A reference names a resource that is not an element or a field.
    InvalidReference {
        path: String,
        id: ResourceId,
    },
    /// Inlining produced two siblings with the same name.
    DuplicateName {
        path: String,
        name: String,
    },
    /// Inlined tree exceeds the node budget (shared references expand multiplicatively).
    TooLarge {
        limit: usize,
    },
}

impl ResolveError {
    pub fn code(&self) -> &'static str {
        match self {
            ResolveError::UnresolvedReference { .. } => "UNRESOLVED_REFERENCE",
            ResolveError::CycleDetected { .. } => "CYCLE_DETECTED",
            ResolveError::InvalidReference { .. } => "INVALID_REFERENCE",
            ResolveError::DuplicateName { .. } => "MODEL_VIOLATION",
            ResolveError::TooLarge { .. } => "RESOLVED_TOO_LARGE",
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            ResolveError::UnresolvedReference { path, .. }
            | ResolveError::InvalidReference { path, .. }
            | ResolveError::DuplicateName { path, .. } => Some(path),
            _ => None,
        }
    }
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolveError::UnresolvedReference { path, id } => {
                write!(f, "reference at `{path}` to unknown resource {id}")
            }
            ResolveError::CycleDetected { cycle } => {
                f.write_str("reference cycle through ")?;
                for (i, id) in cycle.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" -> ")?;
                    }
                    write!(f, "{id}")?;
                }
                Ok(())
            }
            ResolveError::InvalidReference { path, id } => {
                write!(f, "reference at `{path}` to {id}, which is not an element or field")
            }
            ResolveError::DuplicateName { path, name } => {
                write!(f, "duplicate sibling name `{name}` at `{path}`")
            }
            ResolveError::TooLarge { limit } => {
                write!(f, "resolved template exceeds {limit} nodes")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ResolveError {}
