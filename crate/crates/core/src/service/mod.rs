//! Voting sessions: Draft, then Voting, then Closed, persisted as an
//! append-only event log.

mod session;
mod store;

use std::path::PathBuf;

use thiserror::Error;

use crate::group::{BallotIssue, GroupError};

pub use session::{
    AlternativeCard, Event, ExportedVoter, FarmerArea, Session, SessionAlternative, SessionExport, SessionState,
    SessionSummary, Voter, VoterStatus, VoterView, MIN_ALTERNATIVES, SESSION_SCHEMA_VERSION,
};
pub use store::{ImportOutcome, SessionStore, VoterToken, EVENT_LOG_FILE};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("session {session} is {}", .state.name())]
    WrongState { session: String, state: SessionState },
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("weight must be positive, got {0}")]
    NonpositiveWeight(f64),
    #[error("voting needs at least {MIN_ALTERNATIVES} alternatives, have {0}")]
    TooFewAlternatives(usize),
    #[error("voting needs at least one registered voter")]
    NoVoters,
    #[error("no ballot yet from {}", .0.join(", "))]
    MissingBallots(Vec<String>),
    #[error("no ballots were submitted")]
    NoBallots,
    #[error("unknown access token")]
    BadToken,
    #[error("invalid ballot: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "))]
    InvalidBallot(Vec<BallotIssue>),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("bad document: {0}")]
    BadDocument(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("event log line {line} is unreadable: {message}")]
    CorruptLog { line: usize, message: String },
}

impl ServiceError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "NOT_FOUND",
            ServiceError::WrongState { .. } => "WRONG_STATE",
            ServiceError::Duplicate(_) => "DUPLICATE",
            ServiceError::NonpositiveWeight(_) => "NONPOSITIVE_WEIGHT",
            ServiceError::TooFewAlternatives(_) => "TOO_FEW_ALTERNATIVES",
            ServiceError::NoVoters => "NO_VOTERS",
            ServiceError::MissingBallots(_) => "MISSING_BALLOTS",
            ServiceError::NoBallots => "NO_BALLOTS",
            ServiceError::BadToken => "BAD_TOKEN",
            ServiceError::InvalidBallot(_) => "INVALID_BALLOT",
            ServiceError::Group(_) => "GROUP_ERROR",
            ServiceError::BadDocument(_) => "BAD_DOCUMENT",
            ServiceError::Io { .. } => "IO",
            ServiceError::CorruptLog { .. } => "CORRUPT_LOG",
        }
    }
}
