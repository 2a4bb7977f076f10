use std::collections::{BTreeMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{TopicId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuestionKind {
    SingleChoice,
    MultiChoice,
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub prompt: String,
    pub kind: QuestionKind,
    #[serde(default)]
    pub choices: Vec<String>,
}

/// Choice questions are answered with choice indexes, free-text ones with a string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Choices(Vec<usize>),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub topic: TopicId,
    pub questions: Vec<Question>,
    pub responses: BTreeMap<UserId, Vec<Answer>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSummary {
    pub prompt: String,
    pub kind: QuestionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<IndexMap<String, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub texts: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireSummary {
    pub topic: TopicId,
    pub respondents: usize,
    pub questions: Vec<QuestionSummary>,
}

impl Questionnaire {
    pub fn new(topic: TopicId, questions: Vec<Question>) -> Result<Self> {
        if questions.is_empty() {
            return Err(Error::BadRequest("a questionnaire needs at least one question".into()));
        }
        for (i, q) in questions.iter().enumerate() {
            let distinct: HashSet<&String> = q.choices.iter().collect();
            let ok = match q.kind {
                QuestionKind::FreeText => q.choices.is_empty(),
                _ => !q.choices.is_empty() && distinct.len() == q.choices.len(),
            };
            if !ok || q.prompt.trim().is_empty() {
                return Err(Error::BadRequest(format!("question {i} is malformed")));
            }
        }
        Ok(Self {
            topic,
            questions,
            responses: BTreeMap::new(),
        })
    }

    fn check(&self, answers: &[Answer]) -> Result<()> {
        if answers.len() != self.questions.len() {
            return Err(Error::LengthMismatch {
                expected: self.questions.len(),
                actual: answers.len(),
            });
        }
        for (i, (q, a)) in self.questions.iter().zip(answers).enumerate() {
            match (q.kind, a) {
                (QuestionKind::FreeText, Answer::Text(_)) => {}
                (QuestionKind::SingleChoice, Answer::Choices(sel)) if sel.len() == 1 => {}
                (QuestionKind::MultiChoice, Answer::Choices(sel))
                    if sel.iter().collect::<HashSet<_>>().len() == sel.len() => {}
                _ => return Err(Error::ArityMismatch { question: i }),
            }
            if let Answer::Choices(sel) = a {
                if let Some(bad) = sel.iter().find(|&&c| c >= q.choices.len()) {
                    return Err(Error::UnknownOption(bad.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Stores `user`'s answers, replacing any earlier set. True on first response.
    pub fn submit(&mut self, user: UserId, answers: Vec<Answer>) -> Result<bool> {
        self.check(&answers)?;
        Ok(self.responses.insert(user, answers).is_none())
    }

    pub fn summarize(&self) -> QuestionnaireSummary {
        let questions = self
            .questions
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let answers = self.responses.values().map(|r| &r[i]);
                match q.kind {
                    QuestionKind::FreeText => QuestionSummary {
                        prompt: q.prompt.clone(),
                        kind: q.kind,
                        counts: None,
                        texts: Some(
                            answers
                                .filter_map(|a| match a {
                                    Answer::Text(t) if !t.trim().is_empty() => Some(t.trim().to_owned()),
                                    _ => None,
                                })
                                .collect(),
                        ),
                    },
                    _ => {
                        let mut counts: IndexMap<String, usize> =
                            q.choices.iter().map(|c| (c.clone(), 0)).collect();
                        for a in answers {
                            if let Answer::Choices(sel) = a {
                                for &c in sel {
                                    counts[c] += 1;
                                }
                            }
                        }
                        QuestionSummary {
                            prompt: q.prompt.clone(),
                            kind: q.kind,
                            counts: Some(counts),
                            texts: None,
                        }
                    }
                }
            })
            .collect();
        QuestionnaireSummary {
            topic: self.topic,
            respondents: self.responses.len(),
            questions,
        }
    }
}
