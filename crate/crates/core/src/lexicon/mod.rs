//! The prohibited-content, blacklist and username-registry databases, plus
//! the account and deviation tables, behind one value type.
//!
//! [`LexiconStores`] is a plain value: queries borrow it, mutators take
//! `&mut self` and bump a single global revision counter. Concurrent access
//! goes through [`SharedStores`], which hands out immutable snapshots.

mod matcher;
mod persist;
mod shared;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub use matcher::{TermMatch, TermMatcher};
pub use persist::{load, save, FILE_NAMES};
pub use shared::SharedStores;

use crate::error::StoreError;
use crate::model::{
    Account, AccountId, AccountStatus, BlacklistEntry, Deviation, DeviationId, ProhibitedTerm,
    ReasonCode, SanctionCode, TermSeverity, Timestamp, UsernameId, UsernameRecord,
};
use crate::text::{normalize, FoldTables};

/// Global mutation counter shared by all five tables.
pub type Revision = u64;

pub type SkeletonIndex = BTreeMap<String, BTreeSet<UsernameId>>;

#[derive(Debug, Clone)]
pub struct LexiconStores {
    tables: Arc<FoldTables>,
    prohibited: BTreeMap<String, ProhibitedTerm>,
    matcher: Arc<TermMatcher>,
    blacklist: BTreeMap<String, BlacklistEntry>,
    registry: BTreeMap<UsernameId, UsernameRecord>,
    skeleton_index: SkeletonIndex,
    accounts: BTreeMap<AccountId, Account>,
    deviations: Vec<Deviation>,
    revision: Revision,
}

impl Default for LexiconStores {
    fn default() -> Self {
        Self::new(Arc::new(FoldTables::default()))
    }
}

impl LexiconStores {
    pub fn new(tables: Arc<FoldTables>) -> Self {
        LexiconStores {
            tables,
            prohibited: BTreeMap::new(),
            matcher: Arc::new(TermMatcher::default()),
            blacklist: BTreeMap::new(),
            registry: BTreeMap::new(),
            skeleton_index: BTreeMap::new(),
            accounts: BTreeMap::new(),
            deviations: Vec::new(),
            revision: 0,
        }
    }

    pub fn tables(&self) -> &FoldTables {
        &self.tables
    }

    pub fn shared_tables(&self) -> Arc<FoldTables> {
        Arc::clone(&self.tables)
    }

    pub fn revision(&self) -> Revision {
        self.revision
    }

    /// Skeleton of a normalized name under this store's fold tables.
    pub fn fold(&self, normalized: &str) -> String {
        self.tables.fold(normalized)
    }

    /// Canonical stored form of a prohibited term.
    pub fn canonical_term(&self, term: &str) -> String {
        self.tables.fold(&normalize(term))
    }

    // ---- queries -------------------------------------------------------

    /// Every occurrence of a prohibited term in the folded `name`.
    pub fn match_prohibited(&self, name: &str) -> Vec<TermMatch> {
        self.matcher.find_all(&self.fold(name))
    }

    /// Blacklist entry keyed by `name` or by its folded form.
    pub fn is_blacklisted(&self, name: &str) -> Option<&BlacklistEntry> {
        self.blacklist
            .get(name)
            .or_else(|| self.blacklist.get(&self.fold(name)))
    }

    /// Registered records whose skeleton equals the candidate's, oldest first.
    pub fn find_duplicates(&self, raw: &str) -> Vec<&UsernameRecord> {
        let skeleton = self.fold(&normalize(raw));
        let mut out: Vec<&UsernameRecord> = self
            .skeleton_index
            .get(&skeleton)
            .into_iter()
            .flatten()
            .filter_map(|id| self.registry.get(id))
            .collect();
        out.sort_by_key(|r| (r.created_at, r.id));
        out
    }

    pub fn prohibited(&self) -> impl Iterator<Item = &ProhibitedTerm> {
        self.prohibited.values()
    }

    pub fn prohibited_term(&self, term: &str) -> Option<&ProhibitedTerm> {
        self.prohibited.get(term)
    }

    pub fn blacklist(&self) -> impl Iterator<Item = &BlacklistEntry> {
        self.blacklist.values()
    }

    pub fn records(&self) -> impl Iterator<Item = &UsernameRecord> {
        self.registry.values()
    }

    pub fn record(&self, id: UsernameId) -> Option<&UsernameRecord> {
        self.registry.get(&id)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn account(&self, id: AccountId) -> Option<&Account> {
        self.accounts.get(&id)
    }

    /// The account's username record.
    pub fn account_record(&self, id: AccountId) -> Option<&UsernameRecord> {
        self.accounts
            .get(&id)
            .and_then(|a| self.registry.get(&a.username_id))
    }

    pub fn deviations(&self) -> &[Deviation] {
        &self.deviations
    }

    pub fn skeleton_index(&self) -> &SkeletonIndex {
        &self.skeleton_index
    }

    pub fn next_username_id(&self) -> UsernameId {
        UsernameId(self.registry.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    pub fn next_account_id(&self) -> AccountId {
        AccountId(self.accounts.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    fn next_deviation_id(&self) -> DeviationId {
        DeviationId(self.deviations.iter().map(|d| d.id.0).max().map_or(1, |m| m + 1))
    }

    /// Skeleton index computed from scratch over the registry.
    pub fn rebuild_skeleton_index(&self) -> SkeletonIndex {
        let mut index = SkeletonIndex::new();
        for r in self.registry.values() {
            index.entry(r.skeleton.clone()).or_default().insert(r.id);
        }
        index
    }

    /// Checks every cross-table invariant; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.rebuild_skeleton_index() != self.skeleton_index {
            return Err("skeleton index out of sync with registry".into());
        }
        for r in self.registry.values() {
            if r.normalized != normalize(&r.raw) || r.skeleton != self.fold(&r.normalized) {
                return Err(format!("record {} has stale derived forms", r.id));
            }
        }
        for key in self.blacklist.keys() {
            if normalize(key) != *key {
                return Err(format!("blacklist key `{key}` is not normalized"));
            }
        }
        for t in self.prohibited.values() {
            if t.term.is_empty() || normalize(&t.term) != t.term {
                return Err(format!("prohibited term `{}` is not normalized", t.term));
            }
        }
        for a in self.accounts.values() {
            if !self.registry.contains_key(&a.username_id) {
                return Err(format!("account {} references missing record {}", a.id, a.username_id));
            }
        }
        for d in &self.deviations {
            if !self.accounts.contains_key(&d.account_id) {
                return Err(format!("deviation {} references missing account {}", d.id, d.account_id));
            }
        }
        Ok(())
    }

    // ---- mutators ------------------------------------------------------

    fn bump(&mut self) -> Revision {
        self.revision += 1;
        self.revision
    }

    /// Inserts a record, or refreshes it when `id` exists with the same raw
    /// name. Derived forms are always computed here.
    pub fn upsert_record(
        &mut self,
        id: UsernameId,
        raw: &str,
        created_at: Timestamp,
    ) -> Result<Revision, StoreError> {
        if let Some(existing) = self.registry.get(&id) {
            if existing.raw != raw {
                return Err(StoreError::RecordConflict {
                    id,
                    existing: existing.raw.clone(),
                });
            }
        }
        let record = UsernameRecord::new(id, raw, &self.tables, created_at);
        self.unindex(id);
        self.skeleton_index
            .entry(record.skeleton.clone())
            .or_default()
            .insert(id);
        self.registry.insert(id, record);
        Ok(self.bump())
    }

    /// Removes a record that no account references.
    pub fn remove_record(&mut self, id: UsernameId) -> Result<Revision, StoreError> {
        if !self.registry.contains_key(&id) {
            return Err(StoreError::RecordNotFound(id));
        }
        if let Some(a) = self.accounts.values().find(|a| a.username_id == id) {
            return Err(StoreError::InvalidInput(format!(
                "record {id} is still referenced by account {}",
                a.id
            )));
        }
        self.unindex(id);
        self.registry.remove(&id);
        Ok(self.bump())
    }

    fn unindex(&mut self, id: UsernameId) {
        if let Some(old) = self.registry.get(&id) {
            if let Some(set) = self.skeleton_index.get_mut(&old.skeleton) {
                set.remove(&id);
                if set.is_empty() {
                    self.skeleton_index.remove(&old.skeleton);
                }
            }
        }
    }

    /// Adds or replaces a prohibited term. The term is stored normalized and
    /// folded so that it can match folded names.
    pub fn add_prohibited(
        &mut self,
        term: &str,
        category: &str,
        severity: TermSeverity,
    ) -> Result<Revision, StoreError> {
        let canonical = self.canonical_term(term);
        if canonical.is_empty() {
            return Err(StoreError::InvalidInput("prohibited term is empty".into()));
        }
        if canonical.contains(['\t', '\n', '\r']) {
            return Err(StoreError::InvalidInput("prohibited term contains control whitespace".into()));
        }
        self.prohibited.insert(
            canonical.clone(),
            ProhibitedTerm {
                term: canonical,
                category: category.to_owned(),
                severity,
            },
        );
        self.rebuild_matcher();
        Ok(self.bump())
    }

    pub fn remove_prohibited(&mut self, term: &str) -> Result<Revision, StoreError> {
        let canonical = self.canonical_term(term);
        if self.prohibited.remove(&canonical).is_none() {
            return Err(StoreError::TermNotFound(term.to_owned()));
        }
        self.rebuild_matcher();
        Ok(self.bump())
    }

    fn rebuild_matcher(&mut self) {
        self.matcher = Arc::new(TermMatcher::new(self.prohibited.values()));
    }

    /// Adds or replaces a blacklist entry keyed by `normalize(name)`.
    pub fn add_blacklist(
        &mut self,
        name: &str,
        sanction_code: SanctionCode,
        reason: &str,
        created_at: Timestamp,
    ) -> Result<Revision, StoreError> {
        let key = normalize(name);
        if key.is_empty() {
            return Err(StoreError::InvalidInput("blacklist name is empty".into()));
        }
        self.blacklist.insert(
            key.clone(),
            BlacklistEntry {
                normalized_name: key,
                sanction_code,
                reason: reason.to_owned(),
                created_at,
            },
        );
        Ok(self.bump())
    }

    pub fn remove_blacklist(&mut self, name: &str) -> Result<Revision, StoreError> {
        let key = normalize(name);
        if self.blacklist.remove(&key).is_none() {
            return Err(StoreError::BlacklistNotFound(name.to_owned()));
        }
        Ok(self.bump())
    }

    pub fn insert_account(&mut self, account: Account) -> Result<Revision, StoreError> {
        if self.accounts.contains_key(&account.id) {
            return Err(StoreError::AccountConflict(account.id));
        }
        if !self.registry.contains_key(&account.username_id) {
            return Err(StoreError::RecordNotFound(account.username_id));
        }
        self.accounts.insert(account.id, account);
        Ok(self.bump())
    }

    pub fn set_account_status(
        &mut self,
        id: AccountId,
        status: AccountStatus,
    ) -> Result<Revision, StoreError> {
        let account = self
            .accounts
            .get_mut(&id)
            .ok_or(StoreError::AccountNotFound(id))?;
        account.status = status;
        Ok(self.bump())
    }

    /// Points an account at a different username record.
    pub fn set_account_username(
        &mut self,
        id: AccountId,
        username_id: UsernameId,
    ) -> Result<Revision, StoreError> {
        if !self.registry.contains_key(&username_id) {
            return Err(StoreError::RecordNotFound(username_id));
        }
        let account = self
            .accounts
            .get_mut(&id)
            .ok_or(StoreError::AccountNotFound(id))?;
        account.username_id = username_id;
        Ok(self.bump())
    }

    /// Appends a deviation for an existing account.
    pub fn record_deviation(
        &mut self,
        account_id: AccountId,
        rule_code: ReasonCode,
        sanction_code: SanctionCode,
        note: &str,
        created_at: Timestamp,
    ) -> Result<Deviation, StoreError> {
        if !self.accounts.contains_key(&account_id) {
            return Err(StoreError::AccountNotFound(account_id));
        }
        let deviation = Deviation {
            id: self.next_deviation_id(),
            account_id,
            rule_code,
            sanction_code,
            note: note.to_owned(),
            created_at,
        };
        self.deviations.push(deviation.clone());
        self.bump();
        Ok(deviation)
    }

    /// Loader-only: installs rows without revision bumps or derived-form
    /// recomputation beyond the record constructor.
    pub(crate) fn restore(
        &mut self,
        prohibited: Vec<ProhibitedTerm>,
        blacklist: Vec<BlacklistEntry>,
        records: Vec<UsernameRecord>,
        accounts: Vec<Account>,
        deviations: Vec<Deviation>,
        revision: Revision,
    ) {
        self.prohibited = prohibited.into_iter().map(|t| (t.term.clone(), t)).collect();
        self.rebuild_matcher();
        self.blacklist = blacklist
            .into_iter()
            .map(|e| (e.normalized_name.clone(), e))
            .collect();
        self.registry = records.into_iter().map(|r| (r.id, r)).collect();
        self.skeleton_index = self.rebuild_skeleton_index();
        self.accounts = accounts.into_iter().map(|a| (a.id, a)).collect();
        self.deviations = deviations;
        self.revision = revision;
    }
}
