//! The forum engine: every operation of the elicitation process, persisted
//! through the [`Store`] seam.
//!
//! Each mutation reads the entities it touches, computes the new values with
//! the pure domain types, and commits one batch guarded by the versions it
//! read. A concurrent writer makes the batch fail with `STALE_VERSION`;
//! lifecycle events surface that to the caller, other operations re-read and
//! retry a bounded number of times.

mod accounts;
mod discussion;
mod incentives;
mod topics;

use std::fmt::Display;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use accounts::AuthSession;
pub use incentives::{PublicQuestion, PublicTest};
pub use topics::{NewTopic, TopicPage, TopicSummary};

use super::config::Config;
use super::keys;
use crate::clock::{Clock, SystemClock, Timestamp};
use crate::dedup::{NgramIndex, Screener};
use crate::error::{Error, Result};
use crate::ids::{TemplateId, TopicId, UserId};
use crate::stakeholders::{LedgerEntry, Reason, Stakeholder};
use crate::store::{Expect, FileStore, MemoryStore, Op, Store};
use crate::templates::default_drafts;

const MAX_RETRIES: usize = 32;

#[derive(Debug, Default)]
struct Counter(AtomicU64);

impl Counter {
    fn next(&self) -> u64 {
        self.0.fetch_add(1, Ordering::SeqCst) + 1
    }

    fn observe(&self, seen: u64) {
        self.0.fetch_max(seen, Ordering::SeqCst);
    }
}

#[derive(Debug, Default)]
struct Ids {
    user: Counter,
    template: Counter,
    topic: Counter,
    post: Counter,
    poll: Counter,
    session: Counter,
    gift: Counter,
    test: Counter,
    ledger: Counter,
}

/// Persisted trace of a topic passing the duplicate gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupRecord {
    pub topic: TopicId,
    pub text: String,
    /// Highest similarity against the corpus at insertion time.
    pub max_score: f64,
    pub threshold: f64,
    pub bypassed: bool,
}

pub struct Forum {
    store: Arc<dyn Store>,
    config: Config,
    clock: Arc<dyn Clock>,
    screener: RwLock<Box<dyn Screener>>,
    ids: Ids,
}

impl std::fmt::Debug for Forum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Forum").field("config", &self.config).finish_non_exhaustive()
    }
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("domain types serialize to JSON")
}

impl Forum {
    /// Opens a forum over `store`, rebuilding the duplicate index and id
    /// counters, and installs the default templates into an empty store.
    pub fn open(config: Config, store: Arc<dyn Store>, clock: Arc<dyn Clock>) -> Result<Self> {
        config.validate()?;
        let forum = Forum {
            screener: RwLock::new(Box::new(NgramIndex::new(config.dedup.gram_size))),
            store,
            config,
            clock,
            ids: Ids::default(),
        };
        forum.recover()?;
        Ok(forum)
    }

    /// Opens with the storage named in `config`: a journal file or memory.
    pub fn from_config(config: Config) -> Result<Self> {
        let store: Arc<dyn Store> = match &config.storage {
            Some(path) => Arc::new(FileStore::open(path)?),
            None => Arc::new(MemoryStore::new()),
        };
        Self::open(config, store, Arc::new(SystemClock))
    }

    pub fn in_memory(config: Config) -> Result<Self> {
        Self::open(config, Arc::new(MemoryStore::new()), Arc::new(SystemClock))
    }

    pub fn open_path(config: Config, path: &Path) -> Result<Self> {
        Self::open(config, Arc::new(FileStore::open(path)?), Arc::new(SystemClock))
    }

    fn recover(&self) -> Result<()> {
        let max_key = |prefix: &str, counter: &Counter| -> Result<()> {
            for (key, _) in self.store.scan(prefix)? {
                if let Some(id) = keys::trailing_id(&key) {
                    counter.observe(id);
                }
            }
            Ok(())
        };
        max_key(keys::USERS, &self.ids.user)?;
        max_key(keys::TEMPLATES, &self.ids.template)?;
        max_key(keys::TOPICS, &self.ids.topic)?;
        max_key(keys::POLLS, &self.ids.poll)?;
        max_key(keys::SESSIONS, &self.ids.session)?;
        max_key(keys::GIFTS, &self.ids.gift)?;
        max_key(keys::TESTS, &self.ids.test)?;
        max_key(keys::LEDGER, &self.ids.ledger)?;
        for thread in self.values::<crate::threads::Thread>(keys::THREADS)? {
            for post in &thread.posts {
                self.ids.post.observe(post.id.0);
            }
        }

        {
            let mut screener = self.screener.write();
            for record in self.values::<DedupRecord>(keys::DEDUP)? {
                screener.insert(record.topic, &record.text);
            }
        }

        if self.store.scan(keys::TEMPLATES)?.is_empty() {
            let ops = default_drafts()
                .into_iter()
                .map(|draft| {
                    let tpl = draft.into_template(TemplateId(self.ids.template.next()))?;
                    Ok(Op::put(keys::template(tpl.id), to_value(&tpl), Expect::Absent))
                })
                .collect::<Result<Vec<_>>>()?;
            self.commit(ops)?;
        }
        Ok(())
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    // Storage helpers.

    fn commit(&self, ops: Vec<Op>) -> Result<()> {
        self.store.commit(ops).map_err(Error::from)
    }

    fn load<T: DeserializeOwned>(&self, key: &str) -> Result<Option<(T, u64)>> {
        match self.store.get(key)? {
            Some(entry) => Ok(Some((serde_json::from_value(entry.value)?, entry.version))),
            None => Ok(None),
        }
    }

    fn fetch<T: DeserializeOwned>(&self, key: &str, what: impl Display) -> Result<(T, u64)> {
        self.load(key)?.ok_or_else(|| Error::not_found(what))
    }

    fn values<T: DeserializeOwned>(&self, prefix: &str) -> Result<Vec<T>> {
        self.store
            .scan(prefix)?
            .into_iter()
            .map(|(_, entry)| serde_json::from_value(entry.value).map_err(Error::from))
            .collect()
    }

    /// Runs `attempt` until it stops failing on version conflicts.
    fn retrying<T>(&self, mut attempt: impl FnMut() -> Result<T>) -> Result<T> {
        for _ in 1..MAX_RETRIES {
            match attempt() {
                Err(Error::StaleVersion { .. }) => std::thread::yield_now(),
                other => return other,
            }
        }
        attempt()
    }

    fn ledger_op(
        &self,
        actor: UserId,
        counterparty: UserId,
        delta: i64,
        reason: Reason,
        note: &str,
        at: Timestamp,
    ) -> Op {
        let sequence = self.ids.ledger.next();
        let entry = LedgerEntry {
            sequence,
            actor,
            counterparty,
            delta,
            reason,
            note: note.to_owned(),
            timestamp: at,
        };
        Op::put(keys::ledger(sequence), to_value(&entry), Expect::Absent)
    }

    /// Ops crediting `amount` activity points to `user`, or nothing for zero.
    fn activity_ops(&self, user: UserId, amount: u64, reason: Reason, at: Timestamp) -> Result<Vec<Op>> {
        if amount == 0 || user == UserId::SYSTEM {
            return Ok(Vec::new());
        }
        let (mut account, version) = self.fetch::<Stakeholder>(&keys::user(user), format!("stakeholder {user}"))?;
        account.score += amount;
        Ok(vec![
            Op::put(keys::user(user), to_value(&account), Expect::Version(version)),
            self.ledger_op(UserId::SYSTEM, user, amount as i64, reason, "", at),
        ])
    }

    pub fn stakeholder(&self, id: UserId) -> Result<Stakeholder> {
        if id == UserId::SYSTEM {
            return Ok(Stakeholder::system());
        }
        Ok(self.fetch(&keys::user(id), format!("stakeholder {id}"))?.0)
    }

    pub fn stakeholders(&self) -> Result<Vec<Stakeholder>> {
        self.values(keys::USERS)
    }

    pub fn check_right(&self, user: UserId, right: &str) -> Result<bool> {
        Ok(self.stakeholder(user)?.check_right(right))
    }

    pub fn ledger(&self) -> Result<Vec<LedgerEntry>> {
        self.values(keys::LEDGER)
    }

    /// Writes the whole ledger as JSON lines.
    pub fn export_ledger<W: std::io::Write>(&self, out: W) -> Result<()> {
        let entries = self.ledger()?;
        crate::stakeholders::write_json_lines(out, &entries)
            .map_err(|e| Error::Storage(e.to_string()))
    }

    pub fn dedup_records(&self) -> Result<Vec<DedupRecord>> {
        self.values(keys::DEDUP)
    }
}
