//! Posts, polls, questionnaires, negotiation sessions and the aggregated view.

use std::collections::BTreeSet;

use indexmap::IndexMap;

use super::{to_value, Forum};
use crate::error::{Error, Result};
use crate::ids::{PollId, PostId, SessionId, TopicId, UserId};
use crate::model::{Role, Topic, TopicKind, TopicState};
use crate::service::keys;
use crate::stakeholders::{rights, Reason, RewardStatus, Stakeholder};
use crate::store::{Expect, Op};
use crate::threads::{
    AggregatedView, Answer, ChatMessage, NegotiationSession, NegotiationView, Outcome, Poll,
    PollKind, PollView, Post, Questionnaire, QuestionnaireSummary, SessionState, Thread,
};

impl Forum {
    fn topic_versioned(&self, id: TopicId) -> Result<(Topic, u64)> {
        self.fetch(&keys::topic(id), format!("topic {id}"))
    }

    pub fn thread(&self, topic: TopicId) -> Result<Thread> {
        self.topic(topic)?;
        Ok(self
            .load::<Thread>(&keys::thread(topic))?
            .map(|(t, _)| t)
            .unwrap_or_else(|| Thread::new(topic)))
    }

    /// Adds a reply, merging it into the previous post when that post has
    /// the same author. Returns the post as it now stands.
    pub fn add_post(&self, actor: &Stakeholder, topic_id: TopicId, body: &str) -> Result<(Post, bool)> {
        actor.require_right(rights::POST)?;
        self.retrying(|| {
            let (topic, topic_version) = self.topic_versioned(topic_id)?;
            if topic.state != TopicState::SuggestionCollected {
                return Err(Error::TopicNotOpen(topic.state));
            }
            let at = self.now();
            let key = keys::thread(topic_id);
            let (mut thread, expect) = match self.load::<Thread>(&key)? {
                Some((t, v)) => (t, Expect::Version(v)),
                None => (Thread::new(topic_id), Expect::Absent),
            };
            let outcome = thread.add_post(actor.id, body, at, || PostId(self.ids.post.next()))?;
            let mut ops = vec![
                Op::check(keys::topic(topic_id), topic_version),
                Op::put(key, to_value(&thread), expect),
            ];
            ops.extend(self.activity_ops(actor.id, self.config.scoring.post, Reason::Post, at)?);
            self.commit(ops)?;
            let post = thread.post(outcome.post).cloned().expect("post just written");
            Ok((post, outcome.merged))
        })
    }

    pub fn aggregate(&self, id: TopicId) -> Result<AggregatedView> {
        let topic = self.topic(id)?;
        let thread = self.thread(id)?;
        let polls = self
            .poll_ids(id)?
            .into_iter()
            .map(|p| self.poll(p).map(|poll| PollView::from(&poll)))
            .collect::<Result<Vec<_>>>()?;
        let negotiations = self
            .session_ids(id)?
            .into_iter()
            .map(|s| self.session(s).map(|session| NegotiationView::from(&session)))
            .collect::<Result<Vec<_>>>()?;
        let questionnaire = self
            .load::<Questionnaire>(&keys::questionnaire(id))?
            .map(|(q, _)| q.summarize());
        let reward = self.load::<RewardStatus>(&keys::reward(id))?.map(|(r, _)| r);
        Ok(AggregatedView {
            state: topic.state,
            posts: thread.chronological(),
            polls,
            questionnaire,
            negotiations,
            reward,
            relations: self.relations(id)?,
            transitions: self.transitions(id)?,
            topic,
        })
    }

    fn poll_ids(&self, topic: TopicId) -> Result<Vec<PollId>> {
        Ok(self
            .store
            .scan(&keys::topic_polls(topic))?
            .iter()
            .filter_map(|(k, _)| keys::trailing_id(k).map(PollId))
            .collect())
    }

    fn session_ids(&self, topic: TopicId) -> Result<Vec<SessionId>> {
        Ok(self
            .store
            .scan(&keys::topic_sessions(topic))?
            .iter()
            .filter_map(|(k, _)| keys::trailing_id(k).map(SessionId))
            .collect())
    }

    pub fn open_poll(
        &self,
        actor: &Stakeholder,
        topic_id: TopicId,
        kind: PollKind,
        options: Vec<String>,
    ) -> Result<Poll> {
        actor.require_right(rights::OPEN_POLL)?;
        let (topic, version) = self.topic_versioned(topic_id)?;
        if !matches!(topic.state, TopicState::SuggestionCollected | TopicState::Negotiation) {
            return Err(Error::TopicNotOpen(topic.state));
        }
        let poll = Poll::new(PollId(self.ids.poll.next()), topic_id, kind, options)?;
        self.commit(vec![
            Op::check(keys::topic(topic_id), version),
            Op::put(keys::poll(poll.id), to_value(&poll), Expect::Absent),
            Op::put(keys::topic_poll(topic_id, poll.id), serde_json::Value::Null, Expect::Absent),
        ])?;
        Ok(poll)
    }

    pub fn poll(&self, id: PollId) -> Result<Poll> {
        Ok(self.fetch(&keys::poll(id), format!("poll {id}"))?.0)
    }

    /// Records a ballot; the voter's latest ballot replaces earlier ones.
    pub fn cast_vote(&self, actor: &Stakeholder, poll_id: PollId, option: &str) -> Result<()> {
        actor.require_right(rights::VOTE)?;
        self.retrying(|| {
            let (mut poll, version) = self.fetch::<Poll>(&keys::poll(poll_id), format!("poll {poll_id}"))?;
            let first = poll.cast_vote(actor.id, option)?;
            let mut ops = vec![Op::put(keys::poll(poll_id), to_value(&poll), Expect::Version(version))];
            if first {
                ops.extend(self.activity_ops(actor.id, self.config.scoring.vote, Reason::Vote, self.now())?);
            }
            self.commit(ops)
        })
    }

    pub fn close_poll(&self, actor: &Stakeholder, poll_id: PollId) -> Result<Poll> {
        actor.require_right(rights::OPEN_POLL)?;
        self.retrying(|| {
            let (mut poll, version) = self.fetch::<Poll>(&keys::poll(poll_id), format!("poll {poll_id}"))?;
            poll.close();
            self.commit(vec![Op::put(keys::poll(poll_id), to_value(&poll), Expect::Version(version))])?;
            Ok(poll)
        })
    }

    pub fn tally(&self, poll: PollId) -> Result<IndexMap<String, usize>> {
        Ok(self.poll(poll)?.tally())
    }

    pub fn submit_response(&self, actor: &Stakeholder, topic_id: TopicId, answers: Vec<Answer>) -> Result<()> {
        actor.require_right(rights::RESPOND)?;
        self.retrying(|| {
            let (topic, topic_version) = self.topic_versioned(topic_id)?;
            if topic.kind != TopicKind::Questionnaire {
                return Err(Error::BadRequest(format!("topic {topic_id} is not a questionnaire")));
            }
            if topic.state != TopicState::SuggestionCollected {
                return Err(Error::TopicNotOpen(topic.state));
            }
            let key = keys::questionnaire(topic_id);
            let (mut questionnaire, version) =
                self.fetch::<Questionnaire>(&key, format!("questionnaire {topic_id}"))?;
            let first = questionnaire.submit(actor.id, answers.clone())?;
            let mut ops = vec![
                Op::check(keys::topic(topic_id), topic_version),
                Op::put(key, to_value(&questionnaire), Expect::Version(version)),
            ];
            if first {
                ops.extend(self.activity_ops(actor.id, self.config.scoring.response, Reason::Response, self.now())?);
            }
            self.commit(ops)
        })
    }

    pub fn summarize(&self, topic_id: TopicId) -> Result<QuestionnaireSummary> {
        let (questionnaire, _) =
            self.fetch::<Questionnaire>(&keys::questionnaire(topic_id), format!("questionnaire {topic_id}"))?;
        Ok(questionnaire.summarize())
    }

    /// Convenes a negotiation on a topic in `NEGOTIATION`.
    ///
    /// Participants must be related to the topic (its author, someone who
    /// posted in it, or a management user) or hold the
    /// `negotiation-invitable` right. The convening analyst always joins.
    pub fn open_session(
        &self,
        actor: &Stakeholder,
        topic_id: TopicId,
        participants: impl IntoIterator<Item = UserId>,
    ) -> Result<NegotiationSession> {
        actor.require_right(rights::MANAGE_SESSIONS)?;
        let (topic, version) = self.topic_versioned(topic_id)?;
        if topic.state != TopicState::Negotiation {
            return Err(Error::TopicNotOpen(topic.state));
        }
        let posters: BTreeSet<UserId> = self.thread(topic_id)?.posts.iter().map(|p| p.author).collect();
        let mut members = BTreeSet::from([actor.id]);
        for id in participants {
            let user = self.stakeholder(id)?;
            let related = id == topic.author
                || posters.contains(&id)
                || user.role == Role::Management
                || user.check_right(rights::NEGOTIATION_INVITABLE);
            if !related {
                return Err(Error::Forbidden(format!(
                    "{} is not related to topic {topic_id} and is not negotiation-invitable",
                    user.name
                )));
            }
            members.insert(id);
        }
        let session = NegotiationSession::open(SessionId(self.ids.session.next()), topic_id, members, self.now());
        self.commit(vec![
            Op::check(keys::topic(topic_id), version),
            Op::put(keys::session(session.id), to_value(&session), Expect::Absent),
            Op::put(keys::topic_session(topic_id, session.id), serde_json::Value::Null, Expect::Absent),
        ])?;
        Ok(session)
    }

    pub fn session(&self, id: SessionId) -> Result<NegotiationSession> {
        Ok(self.fetch(&keys::session(id), format!("session {id}"))?.0)
    }

    pub fn post_message(&self, actor: &Stakeholder, session_id: SessionId, text: &str) -> Result<ChatMessage> {
        self.retrying(|| {
            let (mut session, version) =
                self.fetch::<NegotiationSession>(&keys::session(session_id), format!("session {session_id}"))?;
            let message = session.post(actor.id, text, self.now())?;
            self.commit(vec![Op::put(keys::session(session_id), to_value(&session), Expect::Version(version))])?;
            Ok(message)
        })
    }

    /// Messages after sequence `since`. Readable by participants and management.
    pub fn fetch_messages(&self, actor: &Stakeholder, session_id: SessionId, since: u64) -> Result<Vec<ChatMessage>> {
        let session = self.session(session_id)?;
        if !session.participants.contains(&actor.id) && actor.role != Role::Management {
            return Err(Error::NotParticipant);
        }
        Ok(session.since(since).to_vec())
    }

    /// Closes a session and fires the outcome's lifecycle event in the same batch.
    pub fn close_session(
        &self,
        actor: &Stakeholder,
        session_id: SessionId,
        outcome: Outcome,
    ) -> Result<(NegotiationSession, Topic)> {
        actor.require_right(rights::MANAGE_SESSIONS)?;
        let (mut session, session_version) =
            self.fetch::<NegotiationSession>(&keys::session(session_id), format!("session {session_id}"))?;
        if session.state == SessionState::Closed {
            return Err(Error::SessionClosed);
        }
        let (mut topic, topic_version) = self.topic_versioned(session.topic)?;
        let at = self.now();
        let record = topic.apply(outcome.event(), actor.id, actor.role, at)?;
        session.close(outcome)?;
        let mut ops = vec![
            Op::put(keys::session(session_id), to_value(&session), Expect::Version(session_version)),
            Op::put(keys::topic(topic.id), to_value(&topic), Expect::Version(topic_version)),
            Op::put(keys::transition(topic.id, record.sequence), to_value(&record), Expect::Absent),
        ];
        ops.extend(self.locked_reputation_ops(&topic)?);
        self.commit(ops)?;
        Ok((session, topic))
    }
}
