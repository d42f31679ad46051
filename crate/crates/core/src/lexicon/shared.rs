use std::sync::{Arc, Mutex, RwLock};

use super::LexiconStores;

/// Single-writer, multi-reader handle over [`LexiconStores`].
///
/// Readers take an `Arc` snapshot pinned at one revision. Writers run on a
/// private copy and publish it only if the closure succeeds, so a snapshot
/// never observes a partial or failed mutation.
#[derive(Debug)]
pub struct SharedStores {
    current: RwLock<Arc<LexiconStores>>,
    writer: Mutex<()>,
}

impl SharedStores {
    pub fn new(stores: LexiconStores) -> Self {
        SharedStores {
            current: RwLock::new(Arc::new(stores)),
            writer: Mutex::new(()),
        }
    }

    pub fn snapshot(&self) -> Arc<LexiconStores> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Runs `f` against a copy of the current state and publishes the copy
    /// on `Ok`. Writers are serialized.
    pub fn write<T, E>(&self, f: impl FnOnce(&mut LexiconStores) -> Result<T, E>) -> Result<T, E> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = (*self.snapshot()).clone();
        let out = f(&mut next)?;
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(out)
    }
}

impl Default for SharedStores {
    fn default() -> Self {
        Self::new(LexiconStores::default())
    }
}
