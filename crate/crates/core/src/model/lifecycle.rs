//! Requirement lifecycle: six states, eleven events, ten management-only edges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Role;
use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{TopicId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TopicState {
    New,
    SuggestionCollected,
    Negotiation,
    Unlocked,
    Locked,
    Cancelled,
}

impl TopicState {
    pub const ALL: [TopicState; 6] = [
        TopicState::New,
        TopicState::SuggestionCollected,
        TopicState::Negotiation,
        TopicState::Unlocked,
        TopicState::Locked,
        TopicState::Cancelled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TopicState::New => "NEW",
            TopicState::SuggestionCollected => "SUGGESTION_COLLECTED",
            TopicState::Negotiation => "NEGOTIATION",
            TopicState::Unlocked => "UNLOCKED",
            TopicState::Locked => "LOCKED",
            TopicState::Cancelled => "CANCELLED",
        }
    }

    pub fn is_terminal(self) -> bool {
        self == TopicState::Cancelled
    }
}

impl fmt::Display for TopicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopicState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopicState::ALL
            .into_iter()
            .find(|state| state.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::BadRequest(format!("unknown topic state {s:?}")))
    }
}

/// Lifecycle events. `SUBMIT` only ever appears on the creation record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LifecycleEvent {
    Submit,
    OpenForSuggestions,
    StartNegotiation,
    LockConsistent,
    CancelFromNegotiation,
    Unlock,
    Renegotiate,
    LockDirect,
    ReopenSuggestions,
    CancelDuplicate,
    CancelLowEvaluation,
}

impl LifecycleEvent {
    pub const ALL: [LifecycleEvent; 11] = [
        LifecycleEvent::Submit,
        LifecycleEvent::OpenForSuggestions,
        LifecycleEvent::StartNegotiation,
        LifecycleEvent::LockConsistent,
        LifecycleEvent::CancelFromNegotiation,
        LifecycleEvent::Unlock,
        LifecycleEvent::Renegotiate,
        LifecycleEvent::LockDirect,
        LifecycleEvent::ReopenSuggestions,
        LifecycleEvent::CancelDuplicate,
        LifecycleEvent::CancelLowEvaluation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LifecycleEvent::Submit => "SUBMIT",
            LifecycleEvent::OpenForSuggestions => "OPEN_FOR_SUGGESTIONS",
            LifecycleEvent::StartNegotiation => "START_NEGOTIATION",
            LifecycleEvent::LockConsistent => "LOCK_CONSISTENT",
            LifecycleEvent::CancelFromNegotiation => "CANCEL_FROM_NEGOTIATION",
            LifecycleEvent::Unlock => "UNLOCK",
            LifecycleEvent::Renegotiate => "RENEGOTIATE",
            LifecycleEvent::LockDirect => "LOCK_DIRECT",
            LifecycleEvent::ReopenSuggestions => "REOPEN_SUGGESTIONS",
            LifecycleEvent::CancelDuplicate => "CANCEL_DUPLICATE",
            LifecycleEvent::CancelLowEvaluation => "CANCEL_LOW_EVALUATION",
        }
    }
}

impl fmt::Display for LifecycleEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LifecycleEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LifecycleEvent::ALL
            .into_iter()
            .find(|event| event.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::BadRequest(format!("unknown lifecycle event {s:?}")))
    }
}

/// One arrow of the state diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: TopicState,
    pub event: LifecycleEvent,
    pub to: TopicState,
    pub role: Role,
}

const fn edge(from: TopicState, event: LifecycleEvent, to: TopicState) -> Edge {
    Edge {
        from,
        event,
        to,
        role: Role::Management,
    }
}

/// Every state-changing edge. Creation (`SUBMIT`) is not listed: it puts a
/// topic into `NEW` and is handled by the creation pipeline.
pub const EDGES: [Edge; 10] = {
    use LifecycleEvent::*;
    use TopicState::*;
    [
        edge(New, OpenForSuggestions, SuggestionCollected),
        edge(SuggestionCollected, StartNegotiation, Negotiation),
        edge(Negotiation, LockConsistent, Locked),
        edge(Negotiation, CancelFromNegotiation, Cancelled),
        edge(Locked, Unlock, Unlocked),
        edge(Unlocked, Renegotiate, Negotiation),
        edge(SuggestionCollected, LockDirect, Locked),
        edge(Negotiation, ReopenSuggestions, SuggestionCollected),
        edge(New, CancelDuplicate, Cancelled),
        edge(SuggestionCollected, CancelLowEvaluation, Cancelled),
    ]
};

fn find_edge(state: TopicState, event: LifecycleEvent) -> Option<&'static Edge> {
    EDGES.iter().find(|e| e.from == state && e.event == event)
}

/// Events `role` may fire from `state`, in event declaration order.
pub fn allowed_events(state: TopicState, role: Role) -> Vec<LifecycleEvent> {
    LifecycleEvent::ALL
        .into_iter()
        .filter(|&event| find_edge(state, event).is_some_and(|e| e.role == role))
        .collect()
}

/// Resolves the target state of `event` from `state`, enforcing the role guard.
///
/// A missing edge is reported before a role mismatch, so a general user
/// attempting a nonexistent transition sees `INVALID_TRANSITION`.
pub fn next_state(state: TopicState, event: LifecycleEvent, role: Role) -> Result<TopicState> {
    let edge = find_edge(state, event).ok_or(Error::InvalidTransition { state, event })?;
    if edge.role != role {
        return Err(Error::Forbidden(format!(
            "{event} requires the {} role",
            edge.role
        )));
    }
    Ok(edge.to)
}

/// Audit entry for one lifecycle step. Sequence 1 is always the `SUBMIT`
/// record written at creation (`from` and `to` are both `NEW`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub topic: TopicId,
    pub from: TopicState,
    pub event: LifecycleEvent,
    pub to: TopicState,
    pub actor: UserId,
    pub at: Timestamp,
    pub sequence: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("record {sequence} expected sequence {expected}")]
    Gap { sequence: u64, expected: u64 },
    #[error("record {sequence} starts from {from} but the topic was {actual}")]
    Discontinuity {
        sequence: u64,
        from: TopicState,
        actual: TopicState,
    },
    #[error("record {sequence} is not a legal edge")]
    IllegalEdge { sequence: u64 },
}

/// Folds an ordered record log starting from `NEW`.
pub fn replay<'a>(records: impl IntoIterator<Item = &'a TransitionRecord>) -> Result<TopicState, ReplayError> {
    let mut state = TopicState::New;
    for (expected, record) in (1u64..).zip(records) {
        if record.sequence != expected {
            return Err(ReplayError::Gap {
                sequence: record.sequence,
                expected,
            });
        }
        if record.from != state {
            return Err(ReplayError::Discontinuity {
                sequence: record.sequence,
                from: record.from,
                actual: state,
            });
        }
        let legal = match record.event {
            LifecycleEvent::Submit => {
                expected == 1 && record.to == TopicState::New
            }
            event => find_edge(state, event).is_some_and(|e| e.to == record.to),
        };
        if !legal {
            return Err(ReplayError::IllegalEdge {
                sequence: record.sequence,
            });
        }
        state = record.to;
    }
    Ok(state)
}
