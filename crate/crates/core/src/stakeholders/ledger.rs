use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::ids::UserId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    Award,
    Post,
    Vote,
    Response,
    AcceptedAnswer,
    Redeem,
}

/// One score movement. `counterparty` is the account whose score changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub sequence: u64,
    pub actor: UserId,
    pub counterparty: UserId,
    pub delta: i64,
    pub reason: Reason,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub timestamp: Timestamp,
}

/// Writes entries as JSON lines, one per entry.
pub fn write_json_lines<'a, W: Write>(
    mut out: W,
    entries: impl IntoIterator<Item = &'a LedgerEntry>,
) -> std::io::Result<()> {
    for entry in entries {
        serde_json::to_writer(&mut out, entry)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Net score change recorded for `user`.
pub fn balance<'a>(user: UserId, entries: impl IntoIterator<Item = &'a LedgerEntry>) -> i64 {
    entries
        .into_iter()
        .filter(|e| e.counterparty == user)
        .map(|e| e.delta)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_lines_and_balance() {
        let at = chrono::Utc::now();
        let entries = vec![
            LedgerEntry { sequence: 1, actor: UserId(1), counterparty: UserId(2), delta: 10, reason: Reason::Award, note: "thanks".into(), timestamp: at },
            LedgerEntry { sequence: 2, actor: UserId(2), counterparty: UserId(2), delta: -4, reason: Reason::Redeem, note: String::new(), timestamp: at },
        ];
        let mut buf = Vec::new();
        write_json_lines(&mut buf, &entries).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: LedgerEntry = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back, entries[0]);
        assert_eq!(balance(UserId(2), &entries), 6);
    }
}
