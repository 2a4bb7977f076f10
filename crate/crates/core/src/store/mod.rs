//! Narrow persistence seam: versioned keys, prefix scans and atomic batches
//! with per-key compare-and-set preconditions.

mod file;
mod memory;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use file::FileStore;
pub use memory::MemoryStore;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StoreError {
    #[error("version conflict on {key}: expected {expected:?}, found {actual:?}")]
    Conflict {
        key: String,
        expected: Expect,
        actual: Option<u64>,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("corrupt journal: {0}")]
    Corrupt(String),
}

impl From<std::io::Error> for StoreError {
    fn from(err: std::io::Error) -> Self {
        StoreError::Io(err.to_string())
    }
}

/// A stored value and its version. Versions start at 1 and grow by one per write.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub version: u64,
    pub value: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Any,
    Absent,
    Version(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Put { key: String, value: Value, expect: Expect },
    Delete { key: String, expect: Expect },
    /// Precondition only; nothing is written.
    Check { key: String, expect: Expect },
}

impl Op {
    pub fn put(key: impl Into<String>, value: Value, expect: Expect) -> Op {
        Op::Put {
            key: key.into(),
            value,
            expect,
        }
    }

    pub fn check(key: impl Into<String>, version: u64) -> Op {
        Op::Check {
            key: key.into(),
            expect: Expect::Version(version),
        }
    }

    fn key(&self) -> &str {
        match self {
            Op::Put { key, .. } | Op::Delete { key, .. } | Op::Check { key, .. } => key,
        }
    }

    fn expect(&self) -> Expect {
        match self {
            Op::Put { expect, .. } | Op::Delete { expect, .. } | Op::Check { expect, .. } => *expect,
        }
    }
}

pub trait Store: Send + Sync {
    fn get(&self, key: &str) -> Result<Option<Entry>, StoreError>;

    /// All entries whose key starts with `prefix`, in key order.
    fn scan(&self, prefix: &str) -> Result<Vec<(String, Entry)>, StoreError>;

    /// Applies every op or none of them.
    fn commit(&self, ops: Vec<Op>) -> Result<(), StoreError>;

    fn put(&self, key: &str, value: Value) -> Result<(), StoreError> {
        self.commit(vec![Op::put(key, value, Expect::Any)])
    }

    fn compare_and_set(&self, key: &str, expect: Expect, value: Value) -> Result<(), StoreError> {
        self.commit(vec![Op::put(key, value, expect)])
    }
}

/// The write half of a batch as it is journaled.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Mutation {
    Put { key: String, value: Value },
    Delete { key: String },
}

/// Key-ordered map with batch validation, shared by both backends.
#[derive(Debug, Default)]
struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    fn get(&self, key: &str) -> Option<Entry> {
        self.entries.get(key).cloned()
    }

    fn scan(&self, prefix: &str) -> Vec<(String, Entry)> {
        self.entries
            .range(prefix.to_owned()..)
            .take_while(|(k, _)| k.starts_with(prefix))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    fn check(&self, ops: &[Op]) -> Result<(), StoreError> {
        for op in ops {
            let actual = self.entries.get(op.key()).map(|e| e.version);
            let ok = match op.expect() {
                Expect::Any => true,
                Expect::Absent => actual.is_none(),
                Expect::Version(v) => actual == Some(v),
            };
            if !ok {
                return Err(StoreError::Conflict {
                    key: op.key().to_owned(),
                    expected: op.expect(),
                    actual,
                });
            }
        }
        Ok(())
    }

    fn mutations(ops: Vec<Op>) -> Vec<Mutation> {
        ops.into_iter()
            .filter_map(|op| match op {
                Op::Put { key, value, .. } => Some(Mutation::Put { key, value }),
                Op::Delete { key, .. } => Some(Mutation::Delete { key }),
                Op::Check { .. } => None,
            })
            .collect()
    }

    fn apply(&mut self, mutations: Vec<Mutation>) {
        for m in mutations {
            match m {
                Mutation::Put { key, value } => {
                    let version = self.entries.get(&key).map_or(0, |e| e.version) + 1;
                    self.entries.insert(key, Entry { version, value });
                }
                Mutation::Delete { key } => {
                    self.entries.remove(&key);
                }
            }
        }
    }
}
