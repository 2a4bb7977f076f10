//! Journal-backed store. Each committed batch is one JSON line, synced before
//! it becomes visible; replay on open rebuilds the table. A torn final line
//! (the process died mid-write) is truncated away, so a batch is either
//! entirely present or entirely absent.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::{Entry, Mutation, Op, Store, StoreError, Table};

#[derive(Serialize, Deserialize)]
struct Batch {
    ops: Vec<Mutation>,
}

#[derive(Debug)]
struct Inner {
    table: Table,
    journal: File,
}

#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    inner: Mutex<Inner>,
}

impl FileStore {
    /// Opens (or creates) the journal at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut journal = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&path)?;
        let mut table = Table::default();
        let mut reader = BufReader::new(&journal);
        let mut good_len = 0u64;
        let mut line = String::new();
        let mut line_no = 0;
        loop {
            line.clear();
            let read = reader.read_line(&mut line)?;
            if read == 0 {
                break;
            }
            line_no += 1;
            let complete = line.ends_with('\n');
            match serde_json::from_str::<Batch>(line.trim_end()) {
                Ok(batch) if complete => {
                    table.apply(batch.ops);
                    good_len += read as u64;
                }
                // Only the final line may be torn.
                _ if !complete => break,
                Ok(_) => unreachable!(),
                Err(err) => {
                    return Err(StoreError::Corrupt(format!("line {line_no}: {err}")));
                }
            }
        }
        drop(reader);
        let total = journal.seek(SeekFrom::End(0))?;
        if total != good_len {
            tracing::warn!(path = %path.display(), dropped = total - good_len, "truncating torn journal tail");
            journal.set_len(good_len)?;
            journal.sync_all()?;
        }
        Ok(Self {
            path,
            inner: Mutex::new(Inner { table, journal }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Store for FileStore {
    fn get(&self, key: &str) -> Result<Option<Entry>, StoreError> {
        Ok(self.inner.lock().table.get(key))
    }

    fn scan(&self, prefix: &str) -> Result<Vec<(String, Entry)>, StoreError> {
        Ok(self.inner.lock().table.scan(prefix))
    }

    fn commit(&self, ops: Vec<Op>) -> Result<(), StoreError> {
        let mut inner = self.inner.lock();
        inner.table.check(&ops)?;
        let batch = Batch {
            ops: Table::mutations(ops),
        };
        if batch.ops.is_empty() {
            return Ok(());
        }
        let mut line = serde_json::to_vec(&batch).map_err(|e| StoreError::Io(e.to_string()))?;
        line.push(b'\n');
        let start = inner.journal.metadata()?.len();
        let written = inner
            .journal
            .write_all(&line)
            .and_then(|_| inner.journal.sync_data());
        if let Err(err) = written {
            let _ = inner.journal.set_len(start);
            return Err(err.into());
        }
        inner.table.apply(batch.ops);
        Ok(())
    }
}
