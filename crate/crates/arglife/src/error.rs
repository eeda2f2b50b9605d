//! Unified error surface with stable machine-parsable codes.
//!
//! Every failure maps to exactly one code and one exit class: 1 for domain
//! errors (validation, gates, phases), 3 for I/O and integrity problems.
//! Usage errors are handled by the argument parser and exit with 2.

use std::path::PathBuf;

use arglife_core::conservation::{SpiError, UpdateError};
use arglife_core::coupling::CouplingError;
use arglife_core::lifecycle::LifecycleError;
use arglife_core::model::ModelError;
use arglife_core::pattern::PatternError;
use arglife_core::represent::DeriveError;
use arglife_core::text::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // Domain errors (exit 1).
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spi(#[from] SpiError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error("{path}: {} parse error(s); first: {}", errors.len(), errors[0])]
    Parse {
        path: PathBuf,
        errors: Vec<ParseError>,
    },
    #[error("{path}: invalid {what}: {detail}")]
    InvalidInput {
        path: PathBuf,
        what: &'static str,
        detail: String,
    },
    #[error("revision {revision} has no granted release record")]
    GateNotGranted { revision: u64 },
    #[error("release document for revision {revision} fails traceability verification ({findings} finding(s))")]
    GateDocumentInvalid { revision: u64, findings: usize },
    #[error("release record {id} was already decided")]
    AlreadyDecided { id: u64 },
    #[error("milestone `{milestone}` is a {kind}, expected a release_document milestone")]
    MilestoneKind { milestone: String, kind: String },
    #[error("unknown milestone `{id}`")]
    UnknownMilestone { id: String },
    #[error("milestone `{id}` already exists")]
    DuplicateMilestone { id: String },
    #[error("unknown revision {id}")]
    UnknownRevision { id: u64 },
    #[error("unknown release record {id}")]
    UnknownRelease { id: u64 },
    #[error("no representation stored for milestone `{milestone}` at revision {revision}")]
    UnknownRepresentation { milestone: String, revision: u64 },

    // Store and I/O errors (exit 3).
    #[error("{path} is not empty")]
    NotEmpty { path: PathBuf },
    #[error("{path} is not an argumentation repository")]
    NotARepository { path: PathBuf },
    #[error("repository layout version {found} is not supported (expected {expected})")]
    UnsupportedLayout { found: u32, expected: u32 },
    #[error("revision {id} already exists in the store")]
    DuplicateRevision { id: u64 },
    #[error("integrity violation: {detail}")]
    Integrity { detail: String },
    #[error("repository is locked by another writer ({path})")]
    Locked { path: PathBuf },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Error {
        let context = context.into();
        move |source| Error::Io { context, source }
    }

    /// Stable machine-parsable code, printed as `error[CODE]: ...`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Lifecycle(inner) => match inner {
                LifecycleError::EmptyFramework => "EMPTY-FRAMEWORK",
                LifecycleError::Framework(_) => "FRAMEWORK-INVALID",
                LifecycleError::ValidationFailed { .. } => "VALIDATION-FAILED",
                LifecycleError::PhaseError { .. } => "PHASE-ERROR",
                LifecycleError::UnknownPattern { .. } => "UNKNOWN-PATTERN",
                LifecycleError::Pattern(inner) => pattern_code(inner),
                LifecycleError::UnknownElement(_) => "UNKNOWN-ELEMENT",
                LifecycleError::DuplicateElement { .. } => "DUPLICATE-ELEMENT",
                LifecycleError::EmptyJustification => "EMPTY-JUSTIFICATION",
                LifecycleError::EliminateRoot => "ELIMINATE-ROOT",
                LifecycleError::InvalidFragment(_) => "INVALID-FRAGMENT",
                LifecycleError::ChangeRejected(_) => "CHANGE-REJECTED",
            },
            Error::Model(inner) => match inner {
                ModelError::Invalid { .. } => "VALIDATION-FAILED",
                ModelError::RootMismatch { .. } => "ROOT-MISMATCH",
                ModelError::UnknownElement(_) => "UNKNOWN-ELEMENT",
                ModelError::KindError { .. } => "KIND-ERROR",
                ModelError::ApplyConflict(_) => "CHANGE-REJECTED",
            },
            Error::Spi(inner) => match inner {
                SpiError::UnknownSpi(_) => "UNKNOWN-SPI",
                SpiError::DuplicateSpi(_) => "DUPLICATE-SPI",
                SpiError::UnknownClaim { .. } => "UNKNOWN-CLAIM",
                SpiError::EmptyClaims(_) => "EMPTY-CLAIMS",
                SpiError::InvalidWindow(_) => "INVALID-WINDOW",
                SpiError::NonMonotoneTimestamps { .. } => "NON-MONOTONE-TIMESTAMPS",
            },
            Error::Update(inner) => match inner {
                UpdateError::NoViolation => "NO-VIOLATION",
                UpdateError::EmptyRationale => "EMPTY-RATIONALE",
                UpdateError::UnaddressedClaim(_) => "UNADDRESSED-CLAIM",
            },
            Error::Derive(DeriveError::EmptyScope { .. }) => "EMPTY-SCOPE",
            Error::Coupling(inner) => match inner {
                CouplingError::UnknownElement(_) => "UNKNOWN-ELEMENT",
                CouplingError::NotASolution { .. } => "KIND-ERROR",
            },
            Error::Parse { .. } => "PARSE-ERROR",
            Error::InvalidInput { .. } => "PARSE-ERROR",
            Error::GateNotGranted { .. } => "GATE-NOT-GRANTED",
            Error::GateDocumentInvalid { .. } => "GATE-DOCUMENT-INVALID",
            Error::AlreadyDecided { .. } => "ALREADY-DECIDED",
            Error::MilestoneKind { .. } => "KIND-ERROR",
            Error::UnknownMilestone { .. } => "UNKNOWN-MILESTONE",
            Error::DuplicateMilestone { .. } => "DUPLICATE-MILESTONE",
            Error::UnknownRevision { .. } => "UNKNOWN-REVISION",
            Error::UnknownRelease { .. } => "UNKNOWN-RELEASE",
            Error::UnknownRepresentation { .. } => "UNKNOWN-REPRESENTATION",
            Error::NotEmpty { .. } => "NOT-EMPTY",
            Error::NotARepository { .. } => "NOT-A-REPOSITORY",
            Error::UnsupportedLayout { .. } => "UNSUPPORTED-LAYOUT",
            Error::DuplicateRevision { .. } => "DUPLICATE-REVISION",
            Error::Integrity { .. } => "INTEGRITY-ERROR",
            Error::Locked { .. } => "REPO-LOCKED",
            Error::Io { .. } => "IO-FAILURE",
        }
    }

    /// Process exit status class: 1 = domain, 3 = I/O or integrity.
    pub fn exit_class(&self) -> i32 {
        match self {
            Error::NotEmpty { .. }
            | Error::NotARepository { .. }
            | Error::UnsupportedLayout { .. }
            | Error::DuplicateRevision { .. }
            | Error::Integrity { .. }
            | Error::Locked { .. }
            | Error::Io { .. } => 3,
            _ => 1,
        }
    }
}

fn pattern_code(error: &PatternError) -> &'static str {
    match error {
        PatternError::UnknownPlaceholder { .. } => "UNKNOWN-PLACEHOLDER",
        PatternError::UndeclaredExpansion { .. } => "UNDECLARED-EXPANSION",
        PatternError::DuplicateExpansion { .. } => "DUPLICATE-EXPANSION",
        PatternError::MultiplicityViolation { .. } => "MULTIPLICITY-VIOLATION",
        PatternError::ExpansionUnavailable { .. } => "EXPANSION-UNAVAILABLE",
        PatternError::CopyCollision { .. } => "COPY-COLLISION",
        PatternError::ResultInvalid { .. } => "VALIDATION-FAILED",
    }
}

impl From<PatternError> for Error {
    fn from(error: PatternError) -> Self {
        Error::Lifecycle(LifecycleError::Pattern(error))
    }
}
