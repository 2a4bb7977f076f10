//! The error vocabulary shared by every forum operation.
//!
//! Each variant maps to a stable machine-readable code (see [`Error::code`])
//! which the HTTP layer and the C ABI surface verbatim.

use serde_json::{json, Value};

use crate::dedup::ScreenResult;
use crate::model::{LifecycleEvent, TopicState};
use crate::store::{Expect, StoreError};
use crate::templates::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("event {event} is not legal from state {state}")]
    InvalidTransition {
        state: TopicState,
        event: LifecycleEvent,
    },
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("stale version: expected {expected}, found {actual}")]
    StaleVersion { expected: u64, actual: u64 },
    #[error("{0} not found")]
    NotFound(String),
    #[error("a requirement cannot be related to itself")]
    SelfRelation,
    #[error("malformed template: {}", .0.join("; "))]
    MalformedTemplate(Vec<String>),
    #[error("submission violates the template ({} problem(s))", .0.len())]
    TemplateViolations(Vec<Violation>),
    #[error("submission duplicates an existing topic")]
    Duplicate(ScreenResult),
    #[error("authentication required")]
    Unauthenticated,
    #[error("bad credentials")]
    BadCredentials,
    #[error("topic is {0}, not open for this operation")]
    TopicNotOpen(TopicState),
    #[error("body is empty")]
    EmptyBody,
    #[error("poll is closed")]
    PollClosed,
    #[error("unknown option {0:?}")]
    UnknownOption(String),
    #[error("answer for question {question} has the wrong arity")]
    ArityMismatch { question: usize },
    #[error("negotiation session is closed")]
    SessionClosed,
    #[error("stakeholder is not a participant of this session")]
    NotParticipant,
    #[error("expected {expected} answers, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("an answer was already accepted for this topic")]
    AlreadyAccepted,
    #[error("score {score} is below cost {cost}")]
    InsufficientScore { score: u64, cost: u64 },
    #[error("gift is out of stock")]
    OutOfStock,
    #[error("amount must be positive")]
    InvalidAmount,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("{0} already exists")]
    AlreadyExists(String),
    #[error("storage failure: {0}")]
    Storage(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidTransition { .. } => "INVALID_TRANSITION",
            Error::Forbidden(_) => "FORBIDDEN",
            Error::StaleVersion { .. } => "STALE_VERSION",
            Error::NotFound(_) => "NOT_FOUND",
            Error::SelfRelation => "SELF_RELATION",
            Error::MalformedTemplate(_) => "MALFORMED_TEMPLATE",
            Error::TemplateViolations(_) => "TEMPLATE_VIOLATIONS",
            Error::Duplicate(_) => "DUPLICATE",
            Error::Unauthenticated => "UNAUTHENTICATED",
            Error::BadCredentials => "BAD_CREDENTIALS",
            Error::TopicNotOpen(_) => "TOPIC_NOT_OPEN",
            Error::EmptyBody => "EMPTY_BODY",
            Error::PollClosed => "POLL_CLOSED",
            Error::UnknownOption(_) => "UNKNOWN_OPTION",
            Error::ArityMismatch { .. } => "ARITY_MISMATCH",
            Error::SessionClosed => "SESSION_CLOSED",
            Error::NotParticipant => "NOT_PARTICIPANT",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::AlreadyAccepted => "ALREADY_ACCEPTED",
            Error::InsufficientScore { .. } => "INSUFFICIENT_SCORE",
            Error::OutOfStock => "OUT_OF_STOCK",
            Error::InvalidAmount => "INVALID_AMOUNT",
            Error::InvalidConfig(_) => "INVALID_CONFIG",
            Error::BadRequest(_) => "BAD_REQUEST",
            Error::AlreadyExists(_) => "ALREADY_EXISTS",
            Error::Storage(_) => "STORAGE",
        }
    }

    /// Structured payload accompanying the code, `null` when there is none.
    pub fn details(&self) -> Value {
        match self {
            Error::InvalidTransition { state, event } => json!({ "state": state, "event": event }),
            Error::StaleVersion { expected, actual } => {
                json!({ "expected": expected, "actual": actual })
            }
            Error::MalformedTemplate(problems) => json!({ "problems": problems }),
            Error::TemplateViolations(violations) => json!({ "violations": violations }),
            Error::Duplicate(result) => serde_json::to_value(result).unwrap_or(Value::Null),
            Error::TopicNotOpen(state) => json!({ "state": state }),
            Error::UnknownOption(option) => json!({ "option": option }),
            Error::ArityMismatch { question } => json!({ "question": question }),
            Error::LengthMismatch { expected, actual } => {
                json!({ "expected": expected, "actual": actual })
            }
            Error::InsufficientScore { score, cost } => json!({ "score": score, "cost": cost }),
            _ => Value::Null,
        }
    }

    /// The `{ code, message, details }` body used on every failed request.
    pub fn to_body(&self) -> Value {
        json!({
            "code": self.code(),
            "message": self.to_string(),
            "details": self.details(),
        })
    }

    pub(crate) fn not_found(what: impl std::fmt::Display) -> Self {
        Error::NotFound(what.to_string())
    }
}

impl From<StoreError> for Error {
    fn from(err: StoreError) -> Self {
        match err {
            StoreError::Conflict {
                expected, actual, ..
            } => Error::StaleVersion {
                expected: match expected {
                    Expect::Version(v) => v,
                    Expect::Any | Expect::Absent => 0,
                },
                actual: actual.unwrap_or(0),
            },
            other => Error::Storage(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Storage(format!("corrupt record: {err}"))
    }
}
