use serde::{Deserialize, Serialize};

use super::Capability;
use crate::error::{Error, Result};
use crate::ids::TestId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestQuestion {
    pub prompt: String,
    pub choices: Vec<String>,
    pub correct: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelThreshold {
    pub threshold: usize,
    pub level: Capability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestDraft {
    pub name: String,
    pub questions: Vec<TestQuestion>,
    pub pass_threshold: usize,
    pub level_map: Vec<LevelThreshold>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityTest {
    pub id: TestId,
    pub name: String,
    pub questions: Vec<TestQuestion>,
    pub pass_threshold: usize,
    /// Strictly increasing thresholds.
    pub level_map: Vec<LevelThreshold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeResult {
    pub correct: usize,
    pub passed: bool,
    pub level: Capability,
}

impl TestDraft {
    pub fn into_test(self, id: TestId) -> Result<CapabilityTest> {
        let mut problems = Vec::new();
        if self.pass_threshold > self.questions.len() {
            problems.push("pass_threshold exceeds the question count".to_owned());
        }
        if self.level_map.windows(2).any(|w| w[0].threshold >= w[1].threshold) {
            problems.push("level_map thresholds must be strictly increasing".to_owned());
        }
        for (i, q) in self.questions.iter().enumerate() {
            if q.correct >= q.choices.len() {
                problems.push(format!("question {i} marks a nonexistent choice correct"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::BadRequest(problems.join("; ")));
        }
        Ok(CapabilityTest {
            id,
            name: self.name,
            questions: self.questions,
            pass_threshold: self.pass_threshold,
            level_map: self.level_map,
        })
    }
}

impl CapabilityTest {
    pub fn grade(&self, answers: &[usize]) -> Result<GradeResult> {
        if answers.len() != self.questions.len() {
            return Err(Error::LengthMismatch {
                expected: self.questions.len(),
                actual: answers.len(),
            });
        }
        let correct = self
            .questions
            .iter()
            .zip(answers)
            .filter(|(q, a)| q.correct == **a)
            .count();
        let level = self
            .level_map
            .iter()
            .rev()
            .find(|entry| entry.threshold <= correct)
            .map_or(Capability::Unrated, |entry| entry.level);
        Ok(GradeResult {
            correct,
            passed: correct >= self.pass_threshold,
            level,
        })
    }
}
