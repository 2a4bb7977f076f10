//! Capability tests, score awards, reward answers and gift redemption.

use serde::{Deserialize, Serialize};

use super::{to_value, Forum};
use crate::error::{Error, Result};
use crate::ids::{GiftId, PostId, TestId, TopicId, UserId};
use crate::model::TopicKind;
use crate::service::keys;
use crate::stakeholders::{
    rights, CapabilityTest, Gift, GiftDraft, GradeResult, LevelThreshold, Reason, RewardStatus,
    Stakeholder, TestDraft,
};
use crate::store::{Expect, Op};

/// A capability test as shown to test takers, without the answer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicTest {
    pub id: TestId,
    pub name: String,
    pub questions: Vec<PublicQuestion>,
    pub pass_threshold: usize,
    pub level_map: Vec<LevelThreshold>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicQuestion {
    pub prompt: String,
    pub choices: Vec<String>,
}

impl From<&CapabilityTest> for PublicTest {
    fn from(t: &CapabilityTest) -> Self {
        Self {
            id: t.id,
            name: t.name.clone(),
            questions: t
                .questions
                .iter()
                .map(|q| PublicQuestion {
                    prompt: q.prompt.clone(),
                    choices: q.choices.clone(),
                })
                .collect(),
            pass_threshold: t.pass_threshold,
            level_map: t.level_map.clone(),
        }
    }
}

impl Forum {
    pub fn define_test(&self, actor: &Stakeholder, draft: TestDraft) -> Result<CapabilityTest> {
        if actor.role != crate::model::Role::Management {
            return Err(Error::Forbidden("capability tests are set by management users".into()));
        }
        let test = draft.into_test(TestId(self.ids.test.next()))?;
        self.commit(vec![Op::put(keys::test(test.id), to_value(&test), Expect::Absent)])?;
        Ok(test)
    }

    pub fn test(&self, id: TestId) -> Result<CapabilityTest> {
        Ok(self.fetch(&keys::test(id), format!("capability test {id}"))?.0)
    }

    pub fn tests(&self) -> Result<Vec<CapabilityTest>> {
        self.values(keys::TESTS)
    }

    /// Grades `actor`'s answers and applies the resulting capability level.
    pub fn grade_test(&self, actor: &Stakeholder, test_id: TestId, answers: &[usize]) -> Result<(GradeResult, Stakeholder)> {
        actor.require_right(rights::TAKE_TEST)?;
        let result = self.test(test_id)?.grade(answers)?;
        let user = self.apply_capability(actor.id, result)?;
        Ok((result, user))
    }

    pub fn apply_capability(&self, user: UserId, result: GradeResult) -> Result<Stakeholder> {
        self.retrying(|| {
            let (mut account, version) =
                self.fetch::<Stakeholder>(&keys::user(user), format!("stakeholder {user}"))?;
            if account.apply_capability(result.level) {
                self.commit(vec![Op::put(keys::user(user), to_value(&account), Expect::Version(version))])?;
            }
            Ok(account)
        })
    }

    /// Management credit to a stakeholder's spendable score.
    pub fn award_score(&self, manager: &Stakeholder, user: UserId, amount: u64, reason: &str) -> Result<u64> {
        manager.require_right(rights::AWARD_SCORE)?;
        if amount == 0 {
            return Err(Error::InvalidAmount);
        }
        let delta = i64::try_from(amount).map_err(|_| Error::InvalidAmount)?;
        self.retrying(|| {
            let (mut account, version) =
                self.fetch::<Stakeholder>(&keys::user(user), format!("stakeholder {user}"))?;
            account.score = account.score.checked_add(amount).ok_or(Error::InvalidAmount)?;
            self.commit(vec![
                Op::put(keys::user(user), to_value(&account), Expect::Version(version)),
                self.ledger_op(manager.id, user, delta, Reason::Award, reason, self.now()),
            ])?;
            Ok(account.score)
        })
    }

    pub fn reward(&self, topic: TopicId) -> Result<RewardStatus> {
        Ok(self.fetch(&keys::reward(topic), format!("reward for topic {topic}"))?.0)
    }

    /// Pays a reward topic's bounty to the author of `post` and bumps their reputation.
    pub fn accept_answer(&self, manager: &Stakeholder, topic_id: TopicId, post_id: PostId) -> Result<RewardStatus> {
        manager.require_right(rights::ACCEPT_ANSWER)?;
        self.retrying(|| {
            let topic = self.topic(topic_id)?;
            if topic.kind != TopicKind::Reward {
                return Err(Error::BadRequest(format!("topic {topic_id} is not a reward topic")));
            }
            let (mut reward, reward_version) =
                self.fetch::<RewardStatus>(&keys::reward(topic_id), format!("reward for topic {topic_id}"))?;
            let post = self
                .thread(topic_id)?
                .post(post_id)
                .cloned()
                .ok_or_else(|| Error::not_found(format!("post {post_id} in topic {topic_id}")))?;
            let at = self.now();
            reward.accept(post.id, post.author, at)?;
            let (mut answerer, answerer_version) =
                self.fetch::<Stakeholder>(&keys::user(post.author), format!("stakeholder {}", post.author))?;
            answerer.score += reward.bounty;
            answerer.reputation += self.config.scoring.accepted_answer_reputation;
            self.commit(vec![
                Op::put(keys::reward(topic_id), to_value(&reward), Expect::Version(reward_version)),
                Op::put(keys::user(answerer.id), to_value(&answerer), Expect::Version(answerer_version)),
                self.ledger_op(
                    manager.id,
                    answerer.id,
                    reward.bounty as i64,
                    Reason::AcceptedAnswer,
                    &format!("topic {topic_id}"),
                    at,
                ),
            ])?;
            Ok(reward)
        })
    }

    pub fn define_gift(&self, actor: &Stakeholder, draft: GiftDraft) -> Result<Gift> {
        if actor.role != crate::model::Role::Management {
            return Err(Error::Forbidden("gifts are managed by management users".into()));
        }
        let gift = draft.into_gift(GiftId(self.ids.gift.next()))?;
        self.commit(vec![Op::put(keys::gift(gift.id), to_value(&gift), Expect::Absent)])?;
        Ok(gift)
    }

    pub fn gift(&self, id: GiftId) -> Result<Gift> {
        Ok(self.fetch(&keys::gift(id), format!("gift {id}"))?.0)
    }

    pub fn gifts(&self) -> Result<Vec<Gift>> {
        self.values(keys::GIFTS)
    }

    /// Spends score on a gift. Returns the remaining score and stock; a
    /// failure leaves both untouched.
    pub fn redeem(&self, actor: &Stakeholder, gift_id: GiftId) -> Result<(u64, u64)> {
        actor.require_right(rights::REDEEM)?;
        self.retrying(|| {
            let (mut gift, gift_version) = self.fetch::<Gift>(&keys::gift(gift_id), format!("gift {gift_id}"))?;
            let (mut account, account_version) =
                self.fetch::<Stakeholder>(&keys::user(actor.id), format!("stakeholder {}", actor.id))?;
            gift.redeem(&mut account)?;
            self.commit(vec![
                Op::put(keys::gift(gift_id), to_value(&gift), Expect::Version(gift_version)),
                Op::put(keys::user(account.id), to_value(&account), Expect::Version(account_version)),
                self.ledger_op(account.id, account.id, -(gift.cost as i64), Reason::Redeem, &gift.name, self.now()),
            ])?;
            Ok((account.score, gift.stock))
        })
    }
}
