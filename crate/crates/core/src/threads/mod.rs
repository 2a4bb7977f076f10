//! Discussion inside a topic: merged posts, polls, questionnaires and
//! negotiation chat, plus the single-document aggregated view.

mod negotiation;
mod polls;
mod posts;
mod questionnaire;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use negotiation::{ChatMessage, NegotiationSession, Outcome, SessionState};
pub use polls::{Poll, PollKind, PollState, PRIORITY_SCALE};
pub use posts::{Post, PostOutcome, Segment, Thread};
pub use questionnaire::{
    Answer, Question, QuestionKind, QuestionSummary, Questionnaire, QuestionnaireSummary,
};

use crate::ids::{PollId, SessionId, UserId};
use crate::model::{ReqRelation, Topic, TopicState, TransitionRecord};
use crate::stakeholders::RewardStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollView {
    pub id: PollId,
    pub kind: PollKind,
    pub state: PollState,
    pub options: Vec<String>,
    pub tally: IndexMap<String, usize>,
}

impl From<&Poll> for PollView {
    fn from(poll: &Poll) -> Self {
        Self {
            id: poll.id,
            kind: poll.kind,
            state: poll.state,
            options: poll.options.clone(),
            tally: poll.tally(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationView {
    pub id: SessionId,
    pub state: SessionState,
    pub outcome: Option<Outcome>,
    pub participants: BTreeSet<UserId>,
    pub message_count: usize,
}

impl From<&NegotiationSession> for NegotiationView {
    fn from(s: &NegotiationSession) -> Self {
        Self {
            id: s.id,
            state: s.state,
            outcome: s.outcome,
            participants: s.participants.clone(),
            message_count: s.messages.len(),
        }
    }
}

/// A topic and everything attached to it in one unpaginated document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedView {
    pub topic: Topic,
    pub state: TopicState,
    /// Merged posts ordered by `first_at`.
    pub posts: Vec<Post>,
    pub polls: Vec<PollView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub questionnaire: Option<QuestionnaireSummary>,
    pub negotiations: Vec<NegotiationView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward: Option<RewardStatus>,
    pub relations: Vec<ReqRelation>,
    pub transitions: Vec<TransitionRecord>,
}
