use std::collections::{BTreeMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{PollId, TopicId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PollKind {
    /// Fixed 1 to 5 scale.
    Priority,
    Preference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PollState {
    Open,
    Closed,
}

pub const PRIORITY_SCALE: [&str; 5] = ["1", "2", "3", "4", "5"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poll {
    pub id: PollId,
    pub topic: TopicId,
    pub kind: PollKind,
    pub options: Vec<String>,
    pub state: PollState,
    pub ballots: BTreeMap<UserId, String>,
}

impl Poll {
    /// Priority polls ignore `options` unless they spell out the 1 to 5 scale.
    pub fn new(id: PollId, topic: TopicId, kind: PollKind, options: Vec<String>) -> Result<Self> {
        let options = match kind {
            PollKind::Priority => {
                if !options.is_empty() && options.iter().map(String::as_str).ne(PRIORITY_SCALE) {
                    return Err(Error::BadRequest(
                        "priority polls use the fixed 1-5 scale".to_owned(),
                    ));
                }
                PRIORITY_SCALE.iter().map(|s| s.to_string()).collect()
            }
            PollKind::Preference => {
                let options: Vec<String> = options.into_iter().map(|o| o.trim().to_owned()).collect();
                let unique: HashSet<&str> = options.iter().map(String::as_str).collect();
                if options.len() < 2 || unique.len() != options.len() || unique.contains("") {
                    return Err(Error::BadRequest(
                        "preference polls need at least two distinct, non-empty options".to_owned(),
                    ));
                }
                options
            }
        };
        Ok(Self {
            id,
            topic,
            kind,
            options,
            state: PollState::Open,
            ballots: BTreeMap::new(),
        })
    }

    /// Records or replaces `voter`'s ballot. Returns true for a first ballot.
    pub fn cast_vote(&mut self, voter: UserId, option: &str) -> Result<bool> {
        if self.state == PollState::Closed {
            return Err(Error::PollClosed);
        }
        let option = option.trim();
        if !self.options.iter().any(|o| o == option) {
            return Err(Error::UnknownOption(option.to_owned()));
        }
        Ok(self.ballots.insert(voter, option.to_owned()).is_none())
    }

    pub fn close(&mut self) {
        self.state = PollState::Closed;
    }

    /// Ballot count per option, every option present, in option order.
    pub fn tally(&self) -> IndexMap<String, usize> {
        let mut counts: IndexMap<String, usize> =
            self.options.iter().map(|o| (o.clone(), 0)).collect();
        for choice in self.ballots.values() {
            if let Some(count) = counts.get_mut(choice) {
                *count += 1;
            }
        }
        counts
    }
}
