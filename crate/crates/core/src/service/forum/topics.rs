//! Templates, the creation pipeline, lifecycle events and requirement relations.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{to_value, DedupRecord, Forum};
use crate::clock::Timestamp;
use crate::dedup::{topic_text, ScreenResult, Verdict};
use crate::error::{Error, Result};
use crate::ids::{TemplateId, TopicId, UserId};
use crate::model::{
    allowed_events, LifecycleEvent, RelationKind, ReqRelation, Role, Topic, TopicKind, TopicState,
    TransitionRecord,
};
use crate::service::keys;
use crate::stakeholders::{rights, RewardStatus, Stakeholder};
use crate::store::{Expect, Op};
use crate::templates::{is_filled, Template, TemplateDraft};
use crate::threads::{Question, Questionnaire};

/// A submission to the creation pipeline.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NewTopic {
    pub kind: Option<TopicKind>,
    pub template_id: TemplateId,
    pub fields: IndexMap<String, String>,
    /// Required for reward topics.
    #[serde(default)]
    pub bounty: Option<u64>,
    /// Required for questionnaire topics.
    #[serde(default)]
    pub questions: Option<Vec<Question>>,
    /// Skip the duplicate gate; needs the bypass right.
    #[serde(default)]
    pub bypass_dedup: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub id: TopicId,
    pub kind: TopicKind,
    pub title: String,
    pub state: TopicState,
    pub author: UserId,
    pub version: u64,
    pub created_at: Timestamp,
    pub updated_at: Timestamp,
    /// Events the requesting role may fire now.
    pub allowed_events: Vec<LifecycleEvent>,
}

impl TopicSummary {
    fn of(topic: &Topic, role: Role) -> Self {
        Self {
            id: topic.id,
            kind: topic.kind,
            title: topic.title().to_owned(),
            state: topic.state,
            author: topic.author,
            version: topic.version,
            created_at: topic.created_at,
            updated_at: topic.updated_at,
            allowed_events: allowed_events(topic.state, role),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicPage {
    pub items: Vec<TopicSummary>,
    /// Pass as `after` to fetch the next page.
    pub next_cursor: Option<TopicId>,
}

impl Forum {
    pub fn define_template(&self, actor: &Stakeholder, draft: TemplateDraft) -> Result<Template> {
        actor.require_right(rights::DEFINE_TEMPLATE)?;
        let template = draft.into_template(TemplateId(self.ids.template.next()))?;
        self.commit(vec![Op::put(keys::template(template.id), to_value(&template), Expect::Absent)])?;
        Ok(template)
    }

    pub fn template(&self, id: TemplateId) -> Result<Template> {
        Ok(self.fetch(&keys::template(id), format!("template {id}"))?.0)
    }

    pub fn templates(&self) -> Result<Vec<Template>> {
        self.values(keys::TEMPLATES)
    }

    /// Dry-run of the duplicate gate against the current corpus.
    pub fn screen(&self, text: &str) -> ScreenResult {
        self.screener.read().screen(text, self.config.dedup.threshold)
    }

    /// Template check, duplicate gate, then an atomic insert of the topic in
    /// `NEW` with its index entry and first transition record. With
    /// `auto_open` the same batch also opens it for suggestions.
    pub fn create_topic(&self, actor: &Stakeholder, req: NewTopic) -> Result<Topic> {
        actor.require_right(rights::CREATE_TOPIC)?;
        let template = self.template(req.template_id)?;
        let kind = req.kind.unwrap_or(template.topic_kind);
        if kind != template.topic_kind {
            return Err(Error::BadRequest(format!(
                "template {} is for {} topics, not {kind}",
                template.id, template.topic_kind
            )));
        }
        let (bounty, questionnaire_questions) = match kind {
            TopicKind::Opinion => (None, None),
            TopicKind::Reward => {
                actor.require_right(rights::CREATE_REWARD)?;
                match req.bounty {
                    Some(b) if b > 0 => (Some(b), None),
                    _ => return Err(Error::BadRequest("reward topics need a positive bounty".into())),
                }
            }
            TopicKind::Questionnaire => {
                actor.require_right(rights::CREATE_QUESTIONNAIRE)?;
                let questions = req
                    .questions
                    .clone()
                    .ok_or_else(|| Error::BadRequest("questionnaire topics need questions".into()))?;
                (None, Some(questions))
            }
        };
        if req.bypass_dedup {
            actor.require_right(rights::BYPASS_DEDUP)?;
        }

        template.validate(&req.fields).map_err(Error::TemplateViolations)?;
        let fields: IndexMap<String, String> = template
            .items
            .iter()
            .filter(|item| is_filled(req.fields.get(&item.id)))
            .map(|item| (item.id.clone(), req.fields[&item.id].trim().to_owned()))
            .collect();
        let text = topic_text(fields.values());

        // Held from screening until the index insert.
        let mut screener = self.screener.write();
        let screened = screener.screen(&text, self.config.dedup.threshold);
        if screened.verdict == Verdict::Rejected && !req.bypass_dedup {
            return Err(Error::Duplicate(screened));
        }

        let at = self.now();
        let id = TopicId(self.ids.topic.next());
        let (mut topic, submit) = Topic::submitted(id, kind, template.id, fields, actor.id, bounty, at);
        let mut records = vec![submit];
        if self.config.auto_open {
            let system = Stakeholder::system();
            records.push(topic.apply(LifecycleEvent::OpenForSuggestions, system.id, system.role, at)?);
        }
        let dedup = DedupRecord {
            topic: id,
            text: text.clone(),
            max_score: screened.max_score(),
            threshold: screened.threshold,
            bypassed: screened.verdict == Verdict::Rejected,
        };

        let mut ops = vec![
            Op::put(keys::topic(id), to_value(&topic), Expect::Absent),
            Op::put(keys::dedup(id), to_value(&dedup), Expect::Absent),
        ];
        ops.extend(records.iter().map(|r| {
            Op::put(keys::transition(id, r.sequence), to_value(r), Expect::Absent)
        }));
        if let Some(bounty) = bounty {
            ops.push(Op::put(keys::reward(id), to_value(&RewardStatus::new(id, bounty)), Expect::Absent));
        }
        if let Some(questions) = questionnaire_questions {
            let q = Questionnaire::new(id, questions)?;
            ops.push(Op::put(keys::questionnaire(id), to_value(&q), Expect::Absent));
        }
        self.commit(ops)?;
        screener.insert(id, &text);
        Ok(topic)
    }

    pub fn topic(&self, id: TopicId) -> Result<Topic> {
        Ok(self.fetch(&keys::topic(id), format!("topic {id}"))?.0)
    }

    /// Topics in id order, optionally filtered by state, starting after `after`.
    pub fn list_topics(
        &self,
        role: Role,
        states: Option<&[TopicState]>,
        after: Option<TopicId>,
        limit: usize,
    ) -> Result<TopicPage> {
        let limit = limit.clamp(1, 500);
        let mut items = Vec::new();
        let mut next_cursor = None;
        for topic in self.values::<Topic>(keys::TOPICS)? {
            if after.is_some_and(|a| topic.id <= a) {
                continue;
            }
            if states.is_some_and(|s| !s.contains(&topic.state)) {
                continue;
            }
            if items.len() == limit {
                next_cursor = items.last().map(|s: &TopicSummary| s.id);
                break;
            }
            items.push(TopicSummary::of(&topic, role));
        }
        Ok(TopicPage { items, next_cursor })
    }

    pub fn topics(&self) -> Result<Vec<Topic>> {
        self.values(keys::TOPICS)
    }

    /// Fires `event` on a topic. `expected_version`, when given, must match
    /// the stored version. Conflicting concurrent writes fail with
    /// `STALE_VERSION` and leave the topic unchanged; the caller retries.
    pub fn apply_event(
        &self,
        actor: &Stakeholder,
        id: TopicId,
        event: LifecycleEvent,
        expected_version: Option<u64>,
        duplicate_of: Option<TopicId>,
    ) -> Result<(Topic, TransitionRecord)> {
        let (mut topic, stored) = self.fetch::<Topic>(&keys::topic(id), format!("topic {id}"))?;
        if let Some(expected) = expected_version.filter(|v| *v != topic.version) {
            return Err(Error::StaleVersion {
                expected,
                actual: topic.version,
            });
        }
        let at = self.now();
        let record = topic.apply(event, actor.id, actor.role, at)?;
        actor.require_right(rights::APPLY_LIFECYCLE_EVENT)?;

        let mut ops = vec![
            Op::put(keys::topic(id), to_value(&topic), Expect::Version(stored)),
            Op::put(keys::transition(id, record.sequence), to_value(&record), Expect::Absent),
        ];
        if let Some(target) = duplicate_of {
            if event != LifecycleEvent::CancelDuplicate {
                return Err(Error::BadRequest("duplicate_of only applies to CANCEL_DUPLICATE".into()));
            }
            ops.extend(self.relation_ops(actor, id, target, RelationKind::DuplicateOf, at)?.1);
        }
        ops.extend(self.locked_reputation_ops(&topic)?);
        self.commit(ops)?;
        Ok((topic, record))
    }

    /// Reputation credit for the author when a topic reaches `LOCKED`.
    pub(super) fn locked_reputation_ops(&self, topic: &Topic) -> Result<Vec<Op>> {
        let amount = self.config.scoring.locked_reputation;
        if topic.state != TopicState::Locked || amount == 0 || topic.author == UserId::SYSTEM {
            return Ok(Vec::new());
        }
        let (mut author, version) =
            self.fetch::<Stakeholder>(&keys::user(topic.author), format!("stakeholder {}", topic.author))?;
        author.reputation += amount;
        Ok(vec![Op::put(keys::user(author.id), to_value(&author), Expect::Version(version))])
    }

    pub fn transitions(&self, id: TopicId) -> Result<Vec<TransitionRecord>> {
        self.values(&keys::transitions(id))
    }

    fn relation_ops(
        &self,
        actor: &Stakeholder,
        source: TopicId,
        target: TopicId,
        kind: RelationKind,
        at: Timestamp,
    ) -> Result<(ReqRelation, Vec<Op>)> {
        if source == target {
            return Err(Error::SelfRelation);
        }
        self.topic(source)?;
        self.topic(target)?;
        if let Some((existing, _)) = self.load::<ReqRelation>(&keys::relation_out(source, kind, target))? {
            return Ok((existing, Vec::new()));
        }
        let relation = ReqRelation {
            source,
            target,
            kind,
            created_by: actor.id,
            created_at: at,
        };
        let ops = vec![
            Op::put(keys::relation_out(source, kind, target), to_value(&relation), Expect::Absent),
            Op::put(keys::relation_in(target, kind, source), to_value(&relation), Expect::Absent),
        ];
        Ok((relation, ops))
    }

    /// Records a relation between two topics; an exact repeat returns the existing one.
    pub fn link_requirements(
        &self,
        actor: &Stakeholder,
        source: TopicId,
        target: TopicId,
        kind: RelationKind,
    ) -> Result<ReqRelation> {
        if actor.role != Role::Management {
            return Err(Error::Forbidden("linking requirements is a management action".into()));
        }
        actor.require_right(rights::LINK_REQUIREMENTS)?;
        self.retrying(|| {
            let (relation, ops) = self.relation_ops(actor, source, target, kind, self.now())?;
            if !ops.is_empty() {
                self.commit(ops)?;
            }
            Ok(relation)
        })
    }

    /// Relations where the topic is either end, outgoing first.
    pub fn relations(&self, id: TopicId) -> Result<Vec<ReqRelation>> {
        let mut out = self.values::<ReqRelation>(&keys::relations_out(id))?;
        out.extend(self.values::<ReqRelation>(&keys::relations_in(id))?);
        Ok(out)
    }

    /// Aggregated views of every topic whose state is in `states` (all when `None`).
    pub fn export_requirements(
        &self,
        actor: &Stakeholder,
        states: Option<&[TopicState]>,
    ) -> Result<Vec<crate::threads::AggregatedView>> {
        actor.require_right(rights::EXPORT)?;
        self.export_all(states)
    }

    /// Export without a session, for host-side administration.
    pub fn export_all(&self, states: Option<&[TopicState]>) -> Result<Vec<crate::threads::AggregatedView>> {
        self.topics()?
            .into_iter()
            .filter(|t| states.is_none_or(|s| s.contains(&t.state)))
            .map(|t| self.aggregate(t.id))
            .collect()
    }
}
