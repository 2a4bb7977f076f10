use parking_lot::Mutex;

use super::{Entry, Op, Store, StoreError, Table};

#[derive(Debug, Default)]
pub struct MemoryStore {
    table: Mutex<Table>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Store for MemoryStore {
    fn get(&self, key: &str) -> Result<Option<Entry>, StoreError> {
        Ok(self.table.lock().get(key))
    }

    fn scan(&self, prefix: &str) -> Result<Vec<(String, Entry)>, StoreError> {
        Ok(self.table.lock().scan(prefix))
    }

    fn commit(&self, ops: Vec<Op>) -> Result<(), StoreError> {
        let mut table = self.table.lock();
        table.check(&ops)?;
        table.apply(Table::mutations(ops));
        Ok(())
    }
}
