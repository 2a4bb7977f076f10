use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::UserId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectMessage {
    pub sequence: u64,
    pub from: UserId,
    pub to: UserId,
    pub text: String,
    pub at: Timestamp,
}

/// A recipient's messages, sequenced from 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inbox {
    pub owner: UserId,
    pub messages: Vec<DirectMessage>,
}

impl Inbox {
    pub fn new(owner: UserId) -> Self {
        Self {
            owner,
            messages: Vec::new(),
        }
    }

    pub fn deliver(&mut self, from: UserId, text: &str, at: Timestamp) -> Result<u64> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::EmptyBody);
        }
        let sequence = self.messages.len() as u64 + 1;
        self.messages.push(DirectMessage {
            sequence,
            from,
            to: self.owner,
            text: text.to_owned(),
            at,
        });
        Ok(sequence)
    }

    pub fn since(&self, since: u64) -> &[DirectMessage] {
        let start = usize::try_from(since).unwrap_or(usize::MAX).min(self.messages.len());
        &self.messages[start..]
    }
}
