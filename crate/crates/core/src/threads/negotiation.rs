use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{SessionId, TopicId, UserId};
use crate::model::LifecycleEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionState {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Consistent,
    InconsistentCancel,
    InconsistentReopen,
}

impl Outcome {
    /// The lifecycle event fired on the topic when a session closes this way.
    pub fn event(self) -> LifecycleEvent {
        match self {
            Outcome::Consistent => LifecycleEvent::LockConsistent,
            Outcome::InconsistentCancel => LifecycleEvent::CancelFromNegotiation,
            Outcome::InconsistentReopen => LifecycleEvent::ReopenSuggestions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub sequence: u64,
    pub author: UserId,
    pub text: String,
    pub at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegotiationSession {
    pub id: SessionId,
    pub topic: TopicId,
    pub participants: BTreeSet<UserId>,
    pub messages: Vec<ChatMessage>,
    pub state: SessionState,
    pub outcome: Option<Outcome>,
    pub opened_at: Timestamp,
}

impl NegotiationSession {
    pub fn open(id: SessionId, topic: TopicId, participants: BTreeSet<UserId>, at: Timestamp) -> Self {
        Self {
            id,
            topic,
            participants,
            messages: Vec::new(),
            state: SessionState::Open,
            outcome: None,
            opened_at: at,
        }
    }

    pub fn post(&mut self, author: UserId, text: &str, at: Timestamp) -> Result<ChatMessage> {
        if self.state == SessionState::Closed {
            return Err(Error::SessionClosed);
        }
        if !self.participants.contains(&author) {
            return Err(Error::NotParticipant);
        }
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::EmptyBody);
        }
        let message = ChatMessage {
            sequence: self.messages.len() as u64 + 1,
            author,
            text: text.to_owned(),
            at,
        };
        self.messages.push(message.clone());
        Ok(message)
    }

    /// Messages with sequence greater than `since`, in order.
    pub fn since(&self, since: u64) -> &[ChatMessage] {
        let start = usize::try_from(since).unwrap_or(usize::MAX).min(self.messages.len());
        &self.messages[start..]
    }

    pub fn close(&mut self, outcome: Outcome) -> Result<()> {
        if self.state == SessionState::Closed {
            return Err(Error::SessionClosed);
        }
        self.state = SessionState::Closed;
        self.outcome = Some(outcome);
        Ok(())
    }
}
