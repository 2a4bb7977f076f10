//! Storage key layout. Numeric ids are zero padded so scans come back in id order.

use crate::ids::{GiftId, PollId, SessionId, TemplateId, TestId, TopicId, UserId};
use crate::model::RelationKind;

pub const USERS: &str = "user/";
pub const TEMPLATES: &str = "template/";
pub const TOPICS: &str = "topic/";
pub const THREADS: &str = "thread/";
pub const POLLS: &str = "poll/";
pub const SESSIONS: &str = "session/";
pub const GIFTS: &str = "gift/";
pub const TESTS: &str = "test/";
pub const LEDGER: &str = "ledger/";
pub const DEDUP: &str = "dedup/";

pub fn user(id: UserId) -> String {
    format!("user/{:012}", id.0)
}
pub fn credential(handle: &str) -> String {
    format!("cred/{handle}")
}
pub fn auth(token: &str) -> String {
    format!("auth/{token}")
}
pub fn template(id: TemplateId) -> String {
    format!("template/{:012}", id.0)
}
pub fn topic(id: TopicId) -> String {
    format!("topic/{:012}", id.0)
}
pub fn transitions(topic: TopicId) -> String {
    format!("transition/{:012}/", topic.0)
}
pub fn transition(topic: TopicId, sequence: u64) -> String {
    format!("transition/{:012}/{sequence:012}", topic.0)
}
pub fn dedup(topic: TopicId) -> String {
    format!("dedup/{:012}", topic.0)
}
pub fn relations_out(source: TopicId) -> String {
    format!("relation/{:012}/", source.0)
}
pub fn relation_out(source: TopicId, kind: RelationKind, target: TopicId) -> String {
    format!("relation/{:012}/{}/{:012}", source.0, kind.as_str(), target.0)
}
pub fn relations_in(target: TopicId) -> String {
    format!("relation-in/{:012}/", target.0)
}
pub fn relation_in(target: TopicId, kind: RelationKind, source: TopicId) -> String {
    format!("relation-in/{:012}/{}/{:012}", target.0, kind.as_str(), source.0)
}
pub fn thread(topic: TopicId) -> String {
    format!("thread/{:012}", topic.0)
}
pub fn poll(id: PollId) -> String {
    format!("poll/{:012}", id.0)
}
pub fn topic_polls(topic: TopicId) -> String {
    format!("topic-poll/{:012}/", topic.0)
}
pub fn topic_poll(topic: TopicId, poll: PollId) -> String {
    format!("topic-poll/{:012}/{:012}", topic.0, poll.0)
}
pub fn questionnaire(topic: TopicId) -> String {
    format!("questionnaire/{:012}", topic.0)
}
pub fn session(id: SessionId) -> String {
    format!("session/{:012}", id.0)
}
pub fn topic_sessions(topic: TopicId) -> String {
    format!("topic-session/{:012}/", topic.0)
}
pub fn topic_session(topic: TopicId, session: SessionId) -> String {
    format!("topic-session/{:012}/{:012}", topic.0, session.0)
}
pub fn reward(topic: TopicId) -> String {
    format!("reward/{:012}", topic.0)
}
pub fn test(id: TestId) -> String {
    format!("test/{:012}", id.0)
}
pub fn gift(id: GiftId) -> String {
    format!("gift/{:012}", id.0)
}
pub fn ledger(sequence: u64) -> String {
    format!("ledger/{sequence:012}")
}
pub fn inbox(user: UserId) -> String {
    format!("inbox/{:012}", user.0)
}

/// Parses the trailing numeric id of a key such as `topic/000000000012`.
pub fn trailing_id(key: &str) -> Option<u64> {
    key.rsplit('/').next()?.parse().ok()
}
