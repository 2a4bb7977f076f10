//! Domain entities: roles, topics, requirement relations, and the lifecycle.

mod lifecycle;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use lifecycle::{
    allowed_events, next_state, replay, Edge, LifecycleEvent, ReplayError, TopicState,
    TransitionRecord, EDGES,
};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{TemplateId, TopicId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    General,
    Management,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::General, Role::Management];
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::General => "GENERAL",
            Role::Management => "MANAGEMENT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TopicKind {
    Opinion,
    Questionnaire,
    Reward,
}

impl fmt::Display for TopicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicKind::Opinion => "OPINION",
            TopicKind::Questionnaire => "QUESTIONNAIRE",
            TopicKind::Reward => "REWARD",
        })
    }
}

/// A requirement thread's head. Posts, polls and sessions hang off it by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: TopicId,
    pub kind: TopicKind,
    pub template_id: TemplateId,
    /// Item id to value, in template order.
    pub fields: IndexMap<String, String>,
    pub author: UserId,
    pub state: TopicState,
    pub version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounty: Option<u64>,
    pub created_at: Timestamp,
    pub updated_at: Timestamp,
}

impl Topic {
    /// A freshly submitted topic in `NEW` along with its sequence-1 record.
    #[allow(clippy::too_many_arguments)]
    pub fn submitted(
        id: TopicId,
        kind: TopicKind,
        template_id: TemplateId,
        fields: IndexMap<String, String>,
        author: UserId,
        bounty: Option<u64>,
        at: Timestamp,
    ) -> (Topic, TransitionRecord) {
        let topic = Topic {
            id,
            kind,
            template_id,
            fields,
            author,
            state: TopicState::New,
            version: 1,
            bounty,
            created_at: at,
            updated_at: at,
        };
        let record = TransitionRecord {
            topic: id,
            from: TopicState::New,
            event: LifecycleEvent::Submit,
            to: TopicState::New,
            actor: author,
            at,
            sequence: 1,
        };
        (topic, record)
    }

    /// Applies `event` in place. On error the topic is untouched.
    ///
    /// The record's sequence equals the new version: creation is sequence 1
    /// at version 1 and every later step bumps both by one.
    pub fn apply(
        &mut self,
        event: LifecycleEvent,
        actor: UserId,
        role: Role,
        at: Timestamp,
    ) -> Result<TransitionRecord> {
        let to = next_state(self.state, event, role)?;
        let record = TransitionRecord {
            topic: self.id,
            from: self.state,
            event,
            to,
            actor,
            at,
            sequence: self.version + 1,
        };
        self.state = to;
        self.version += 1;
        self.updated_at = at;
        Ok(record)
    }

    /// The first field value, which every shipped template uses for the title.
    pub fn title(&self) -> &str {
        self.fields.get("title").or_else(|| self.fields.values().next()).map_or("", String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationKind {
    DuplicateOf,
    DependsOn,
    Refines,
    ConflictsWith,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::DuplicateOf => "DUPLICATE_OF",
            RelationKind::DependsOn => "DEPENDS_ON",
            RelationKind::Refines => "REFINES",
            RelationKind::ConflictsWith => "CONFLICTS_WITH",
        }
    }
}

impl FromStr for RelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            RelationKind::DuplicateOf,
            RelationKind::DependsOn,
            RelationKind::Refines,
            RelationKind::ConflictsWith,
        ]
        .into_iter()
        .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
        .ok_or_else(|| Error::BadRequest(format!("unknown relation kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReqRelation {
    pub source: TopicId,
    pub target: TopicId,
    pub kind: RelationKind,
    pub created_by: UserId,
    pub created_at: Timestamp,
}
