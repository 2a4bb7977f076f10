//! Stakeholder accounts and the incentive side of the forum: rights,
//! capability tests, score and reputation, reward answers, gifts and
//! direct messages.

mod capability;
mod gifts;
mod ledger;
mod messages;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use capability::{CapabilityTest, GradeResult, LevelThreshold, TestDraft, TestQuestion};
pub use gifts::{Gift, GiftDraft};
pub use ledger::{balance, write_json_lines, LedgerEntry, Reason};
pub use messages::{DirectMessage, Inbox};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{PostId, TopicId, UserId};
use crate::model::Role;

/// Right keys checked by privileged operations.
pub mod rights {
    pub const CREATE_TOPIC: &str = "create-topic";
    pub const POST: &str = "post";
    pub const VOTE: &str = "vote";
    pub const RESPOND: &str = "respond-questionnaire";
    pub const SEND_MESSAGE: &str = "send-message";
    pub const TAKE_TEST: &str = "take-test";
    pub const REDEEM: &str = "redeem";

    pub const APPLY_LIFECYCLE_EVENT: &str = "apply-lifecycle-event";
    pub const DEFINE_TEMPLATE: &str = "define-template";
    pub const LINK_REQUIREMENTS: &str = "link-requirements";
    pub const OPEN_POLL: &str = "open-poll";
    pub const MANAGE_SESSIONS: &str = "manage-sessions";
    pub const AWARD_SCORE: &str = "award-score";
    pub const ACCEPT_ANSWER: &str = "accept-answer";
    pub const EXPORT: &str = "export";
    pub const CREATE_QUESTIONNAIRE: &str = "create-questionnaire";
    pub const CREATE_REWARD: &str = "create-reward";
    pub const BYPASS_DEDUP: &str = "bypass-dedup";

    pub const POLL_CREATION_SUGGEST: &str = "poll-creation-suggest";
    pub const NEGOTIATION_INVITABLE: &str = "negotiation-invitable";

    pub(super) const GENERAL: &[&str] = &[CREATE_TOPIC, POST, VOTE, RESPOND, SEND_MESSAGE, TAKE_TEST, REDEEM];
    pub(super) const MANAGEMENT: &[&str] = &[
        APPLY_LIFECYCLE_EVENT,
        DEFINE_TEMPLATE,
        LINK_REQUIREMENTS,
        OPEN_POLL,
        MANAGE_SESSIONS,
        AWARD_SCORE,
        ACCEPT_ANSWER,
        EXPORT,
        CREATE_QUESTIONNAIRE,
        CREATE_REWARD,
        BYPASS_DEDUP,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Capability {
    Unrated,
    Novice,
    Contributor,
    Expert,
}

impl Capability {
    /// Rights granted on reaching this level (cumulative up the ladder).
    pub fn granted_rights(self) -> &'static [&'static str] {
        match self {
            Capability::Unrated | Capability::Novice => &[],
            Capability::Contributor => &[rights::POLL_CREATION_SUGGEST],
            Capability::Expert => &[rights::POLL_CREATION_SUGGEST, rights::NEGOTIATION_INVITABLE],
        }
    }
}

pub fn base_rights(role: Role) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = rights::GENERAL.iter().map(|r| r.to_string()).collect();
    if role == Role::Management {
        out.extend(rights::MANAGEMENT.iter().map(|r| r.to_string()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: UserId,
    /// Unique login handle.
    pub name: String,
    pub role: Role,
    pub rights: BTreeSet<String>,
    pub reputation: u64,
    pub capability: Capability,
    pub score: u64,
}

impl Stakeholder {
    pub fn new(id: UserId, name: impl Into<String>, role: Role) -> Self {
        Self {
            id,
            name: name.into(),
            role,
            rights: base_rights(role),
            reputation: 0,
            capability: Capability::Unrated,
            score: 0,
        }
    }

    /// The virtual management actor behind automatic transitions.
    pub fn system() -> Self {
        Self::new(UserId::SYSTEM, "system", Role::Management)
    }

    pub fn check_right(&self, right: &str) -> bool {
        self.rights.contains(right)
    }

    pub fn require_right(&self, right: &str) -> Result<()> {
        if self.check_right(right) {
            Ok(())
        } else {
            Err(Error::Forbidden(format!("{} lacks right {right:?}", self.name)))
        }
    }

    /// Raises the capability level and grants its rights. Levels never go
    /// down and base rights are never removed. Returns whether anything changed.
    pub fn apply_capability(&mut self, level: Capability) -> bool {
        if level <= self.capability {
            return false;
        }
        self.capability = level;
        self.rights.extend(level.granted_rights().iter().map(|r| r.to_string()));
        true
    }
}

/// Bounty bookkeeping for a reward topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardStatus {
    pub topic: TopicId,
    pub bounty: u64,
    pub accepted_post: Option<PostId>,
    pub answerer: Option<UserId>,
    pub accepted_at: Option<Timestamp>,
}

impl RewardStatus {
    pub fn new(topic: TopicId, bounty: u64) -> Self {
        Self {
            topic,
            bounty,
            accepted_post: None,
            answerer: None,
            accepted_at: None,
        }
    }

    pub fn accept(&mut self, post: PostId, answerer: UserId, at: Timestamp) -> Result<()> {
        if self.accepted_post.is_some() {
            return Err(Error::AlreadyAccepted);
        }
        self.accepted_post = Some(post);
        self.answerer = Some(answerer);
        self.accepted_at = Some(at);
        Ok(())
    }
}
