//! Registration, login sessions and direct messages between stakeholders.

use chrono::Duration;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{to_value, Forum};
use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::UserId;
use crate::model::Role;
use crate::service::keys;
use crate::stakeholders::{rights, DirectMessage, Inbox, Stakeholder};
use crate::store::{Expect, Op};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Credential {
    user: UserId,
    salt: String,
    hash: String,
}

fn hash_secret(salt: &str, secret: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(salt.as_bytes());
    hasher.update([0u8]);
    hasher.update(secret.as_bytes());
    hex::encode(hasher.finalize())
}

fn random_hex(bytes: usize) -> String {
    let mut buf = vec![0u8; bytes];
    rand::rng().fill(&mut buf[..]);
    hex::encode(buf)
}

/// A login session. Every request other than login carries `token`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthSession {
    pub token: String,
    pub stakeholder: UserId,
    pub issued_at: Timestamp,
    pub expires_at: Timestamp,
}

impl Forum {
    /// Creates an account. Handles are unique and secrets are stored salted and hashed.
    pub fn register(&self, handle: &str, secret: &str, role: Role) -> Result<Stakeholder> {
        let handle = handle.trim();
        if handle.is_empty() || handle.contains('/') {
            return Err(Error::BadRequest("handle must be non-empty and contain no '/'".into()));
        }
        if secret.is_empty() {
            return Err(Error::BadRequest("secret must not be empty".into()));
        }
        if self.store.get(&keys::credential(handle))?.is_some() {
            return Err(Error::AlreadyExists(format!("handle {handle:?}")));
        }
        let user = Stakeholder::new(UserId(self.ids.user.next()), handle, role);
        let salt = random_hex(16);
        let cred = Credential {
            user: user.id,
            hash: hash_secret(&salt, secret),
            salt,
        };
        self.commit(vec![
            Op::put(keys::credential(handle), to_value(&cred), Expect::Absent),
            Op::put(keys::user(user.id), to_value(&user), Expect::Absent),
        ])
        .map_err(|err| match err {
            Error::StaleVersion { .. } => Error::AlreadyExists(format!("handle {handle:?}")),
            other => other,
        })?;
        Ok(user)
    }

    pub fn login(&self, handle: &str, secret: &str) -> Result<AuthSession> {
        let (cred, _) = self
            .load::<Credential>(&keys::credential(handle.trim()))?
            .ok_or(Error::BadCredentials)?;
        if hash_secret(&cred.salt, secret) != cred.hash {
            return Err(Error::BadCredentials);
        }
        let now = self.now();
        let ttl = i64::try_from(self.config.session_ttl_secs).unwrap_or(i64::MAX);
        let session = AuthSession {
            token: random_hex(32),
            stakeholder: cred.user,
            issued_at: now,
            expires_at: now + Duration::seconds(ttl),
        };
        self.commit(vec![Op::put(keys::auth(&session.token), to_value(&session), Expect::Absent)])?;
        Ok(session)
    }

    /// Resolves a bearer token to its stakeholder; expired or unknown tokens fail.
    pub fn authenticate(&self, token: &str) -> Result<Stakeholder> {
        if token.is_empty() || token.contains('/') {
            return Err(Error::Unauthenticated);
        }
        let (session, _) = self
            .load::<AuthSession>(&keys::auth(token))?
            .ok_or(Error::Unauthenticated)?;
        if self.now() >= session.expires_at {
            return Err(Error::Unauthenticated);
        }
        self.stakeholder(session.stakeholder)
    }

    pub fn logout(&self, token: &str) -> Result<()> {
        self.commit(vec![Op::Delete {
            key: keys::auth(token),
            expect: Expect::Any,
        }])
    }

    pub fn send_message(&self, from: &Stakeholder, to: UserId, text: &str) -> Result<u64> {
        from.require_right(rights::SEND_MESSAGE)?;
        self.stakeholder(to)?;
        if to == UserId::SYSTEM {
            return Err(Error::not_found(format!("stakeholder {to}")));
        }
        let at = self.now();
        self.retrying(|| {
            let key = keys::inbox(to);
            let (mut inbox, expect) = match self.load::<Inbox>(&key)? {
                Some((inbox, v)) => (inbox, Expect::Version(v)),
                None => (Inbox::new(to), Expect::Absent),
            };
            let seq = inbox.deliver(from.id, text, at)?;
            self.commit(vec![Op::put(key, to_value(&inbox), expect)])?;
            Ok(seq)
        })
    }

    pub fn inbox(&self, user: UserId, since: u64) -> Result<Vec<DirectMessage>> {
        Ok(self
            .load::<Inbox>(&keys::inbox(user))?
            .map(|(inbox, _)| inbox.since(since).to_vec())
            .unwrap_or_default())
    }
}
