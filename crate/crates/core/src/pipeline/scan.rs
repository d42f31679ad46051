use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lexicon::{LexiconStores, Revision};
use crate::model::{AccountId, AccountStatus, Reason, Timestamp};

use super::{name_reasons, CheckMode, PipelineConfig};

/// A registered account whose name no longer passes the checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub account_id: AccountId,
    pub reasons: Vec<Reason>,
    pub detected_at: Timestamp,
    pub store_revision: Revision,
}

impl Flag {
    pub fn primary_code(&self) -> Option<crate::model::ReasonCode> {
        self.reasons.first().map(|r| r.code)
    }
}

/// Flags raised so far. Remembers which `(account, revision)` pairs were
/// already flagged and which flags are still unresolved.
#[derive(Debug, Clone, Default)]
pub struct FlagLedger {
    seen: BTreeSet<(AccountId, Revision)>,
    open: BTreeMap<AccountId, Flag>,
}

impl FlagLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unresolved flags, oldest first.
    pub fn open_flags(&self) -> Vec<Flag> {
        let mut flags: Vec<Flag> = self.open.values().cloned().collect();
        flags.sort_by_key(|f| (f.detected_at, f.account_id, f.store_revision));
        flags
    }

    pub fn is_open(&self, account: AccountId) -> bool {
        self.open.contains_key(&account)
    }

    pub fn open_accounts(&self) -> impl Iterator<Item = AccountId> + '_ {
        self.open.keys().copied()
    }

    /// Marks the account's flag handled by a moderator.
    pub fn resolve(&mut self, account: AccountId) -> Option<Flag> {
        self.open.remove(&account)
    }
}

/// Re-runs the name checks for every account that is not blocked.
///
/// Returns only the flags raised by this pass: an account already flagged
/// at the snapshot's revision is skipped. Accounts that now pass have their
/// open flag cleared.
pub fn post_registration_scan(
    stores: &LexiconStores,
    ledger: &mut FlagLedger,
    config: &PipelineConfig,
    now: Timestamp,
) -> Vec<Flag> {
    let revision = stores.revision();
    let mut raised = Vec::new();
    for account in stores.accounts() {
        if account.status == AccountStatus::Blocked {
            continue;
        }
        let Some(record) = stores.record(account.username_id) else {
            continue;
        };
        let reasons = name_reasons(
            &record.raw,
            stores,
            config,
            CheckMode::Rescan {
                own_record: record.id,
            },
        );
        if reasons.is_empty() {
            ledger.open.remove(&account.id);
            continue;
        }
        if !ledger.seen.insert((account.id, revision)) {
            continue;
        }
        let flag = Flag {
            account_id: account.id,
            reasons,
            detected_at: now,
            store_revision: revision,
        };
        ledger.open.insert(account.id, flag.clone());
        raised.push(flag);
    }
    raised
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::SharedStores;
    use crate::model::{ReasonCode, TermSeverity};
    use crate::pipeline::{register, Registration, RegistrationRequest};

    fn seeded(names: &[&str]) -> SharedStores {
        let shared = SharedStores::default();
        for (i, n) in names.iter().enumerate() {
            let out = register(
                &RegistrationRequest::new(*n),
                &shared,
                &PipelineConfig::default(),
                Timestamp(i as i64),
            )
            .unwrap();
            assert!(matches!(out, Registration::Registered { .. }), "{n}");
        }
        shared
    }

    #[test]
    fn new_term_flags_existing_account() {
        let shared = seeded(&["John.Spamer", "Ivan.Petrenko"]);
        shared
            .write(|s| s.add_prohibited("spam", "spam", TermSeverity::Reject))
            .unwrap();
        let mut ledger = FlagLedger::new();
        let flags = post_registration_scan(&shared.snapshot(), &mut ledger, &PipelineConfig::default(), Timestamp(100));
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].account_id, AccountId(1));
        assert_eq!(flags[0].reasons[0].code, ReasonCode::ProhibitedContent);
        assert_eq!(flags[0].reasons[0].detail, "spam@5");
        assert_eq!(flags[0].store_revision, shared.snapshot().revision());
    }

    #[test]
    fn same_revision_not_reflagged() {
        let shared = seeded(&["John.Spamer"]);
        shared
            .write(|s| s.add_prohibited("spam", "spam", TermSeverity::Flag))
            .unwrap();
        let mut ledger = FlagLedger::new();
        let snap = shared.snapshot();
        let cfg = PipelineConfig::default();
        assert_eq!(post_registration_scan(&snap, &mut ledger, &cfg, Timestamp(1)).len(), 1);
        assert!(post_registration_scan(&snap, &mut ledger, &cfg, Timestamp(2)).is_empty());
        assert_eq!(ledger.open_flags().len(), 1);
    }

    #[test]
    fn clean_registry_has_no_flags() {
        let shared = seeded(&["Ivan.Petrenko", "Anna.Shevchenko"]);
        let mut ledger = FlagLedger::new();
        assert!(post_registration_scan(&shared.snapshot(), &mut ledger, &PipelineConfig::default(), Timestamp(0)).is_empty());
    }

    #[test]
    fn removing_the_term_clears_open_flag() {
        let shared = seeded(&["John.Spamer"]);
        let cfg = PipelineConfig::default();
        shared.write(|s| s.add_prohibited("spam", "c", TermSeverity::Reject)).unwrap();
        let mut ledger = FlagLedger::new();
        post_registration_scan(&shared.snapshot(), &mut ledger, &cfg, Timestamp(1));
        assert!(ledger.is_open(AccountId(1)));
        shared.write(|s| s.remove_prohibited("spam")).unwrap();
        post_registration_scan(&shared.snapshot(), &mut ledger, &cfg, Timestamp(2));
        assert!(!ledger.is_open(AccountId(1)));
    }
}
