//! One handle bundling the shared stores, the flag ledger and the pipeline
//! configuration. The CLI and HTTP service both drive this type.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, Mutex, MutexGuard};

use crate::error::{MetricsError, ModerationError, PersistError, StoreError};
use crate::lexicon::{self, LexiconStores, Revision, SharedStores};
use crate::metrics::{self, ClassificationReport, EfficiencyInput, MetricsReport};
use crate::model::{
    AccountId, AccountStatus, Deviation, ReasonCode, SanctionCode, Timestamp, Verdict,
};
use crate::pipeline::{
    self, Flag, FlagLedger, ModerationReport, PipelineConfig, Registration, RegistrationRequest,
    RenameOutcome,
};
use crate::text::FoldTables;

/// How the low-adequacy count for the efficiency indicator is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowAdequacy {
    /// Accounts under moderation or with an unresolved flag.
    Auto,
    Count(u64),
}

impl FromStr for LowAdequacy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(LowAdequacy::Auto),
            n => n
                .parse()
                .map(LowAdequacy::Count)
                .map_err(|_| format!("expected `auto` or a count, got `{n}`")),
        }
    }
}

#[derive(Debug, Default)]
pub struct Engine {
    stores: SharedStores,
    ledger: Mutex<FlagLedger>,
    config: PipelineConfig,
}

impl Engine {
    pub fn new(stores: LexiconStores) -> Self {
        Self::with_config(stores, PipelineConfig::default())
    }

    pub fn with_config(stores: LexiconStores, config: PipelineConfig) -> Self {
        Engine {
            stores: SharedStores::new(stores),
            ledger: Mutex::new(FlagLedger::new()),
            config,
        }
    }

    pub fn load(dir: &Path, tables: Arc<FoldTables>) -> Result<Self, PersistError> {
        Ok(Self::new(lexicon::load(dir, tables)?))
    }

    pub fn save(&self, dir: &Path) -> Result<(), PersistError> {
        lexicon::save(&self.snapshot(), dir)
    }

    pub fn stores(&self) -> &SharedStores {
        &self.stores
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn snapshot(&self) -> Arc<LexiconStores> {
        self.stores.snapshot()
    }

    pub fn revision(&self) -> Revision {
        self.snapshot().revision()
    }

    fn ledger(&self) -> MutexGuard<'_, FlagLedger> {
        self.ledger.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn verify(&self, req: &RegistrationRequest) -> Verdict {
        pipeline::verify_with(req, &self.snapshot(), &self.config)
    }

    pub fn register(
        &self,
        req: &RegistrationRequest,
        now: Timestamp,
    ) -> Result<Registration, StoreError> {
        pipeline::register(req, &self.stores, &self.config, now)
    }

    /// Rescans all accounts against the current snapshot; returns newly
    /// raised flags.
    pub fn scan(&self, now: Timestamp) -> Vec<Flag> {
        let snapshot = self.snapshot();
        pipeline::post_registration_scan(&snapshot, &mut self.ledger(), &self.config, now)
    }

    pub fn open_flags(&self) -> Vec<Flag> {
        self.ledger().open_flags()
    }

    pub fn report(&self, now: Timestamp) -> ModerationReport {
        pipeline::generate_report(&self.open_flags(), now)
    }

    /// Applies a sanction and resolves the account's open flag.
    pub fn sanction(
        &self,
        account: AccountId,
        code: SanctionCode,
        rule: ReasonCode,
        note: &str,
        now: Timestamp,
    ) -> Result<Deviation, ModerationError> {
        let d = pipeline::apply_sanction(&self.stores, account, code, rule, note, now)?;
        self.ledger().resolve(account);
        Ok(d)
    }

    pub fn set_status(
        &self,
        account: AccountId,
        status: AccountStatus,
    ) -> Result<Revision, ModerationError> {
        let rev = pipeline::set_status(&self.stores, account, status)?;
        self.ledger().resolve(account);
        Ok(rev)
    }

    pub fn rename(
        &self,
        account: AccountId,
        new_raw: &str,
        now: Timestamp,
    ) -> Result<RenameOutcome, ModerationError> {
        let out = pipeline::rename_account(&self.stores, &self.config, account, new_raw, now)?;
        if matches!(out, RenameOutcome::Renamed { .. }) {
            self.ledger().resolve(account);
        }
        Ok(out)
    }

    pub fn classification(&self) -> Result<ClassificationReport, MetricsError> {
        metrics::classify_accounts(self.snapshot().accounts())
    }

    /// Every account counts as verified: each one passed the pipeline at
    /// registration.
    pub fn efficiency_input(&self, low: LowAdequacy) -> EfficiencyInput {
        let snapshot = self.snapshot();
        let n_low_adequacy = match low {
            LowAdequacy::Count(n) => n,
            LowAdequacy::Auto => {
                let open: BTreeSet<AccountId> = self.ledger().open_accounts().collect();
                metrics::low_adequacy_count(snapshot.accounts(), &open)
            }
        };
        EfficiencyInput {
            n_verified: snapshot.accounts().count() as u64,
            n_low_adequacy,
        }
    }

    pub fn efficiency(&self, low: LowAdequacy) -> Result<f64, MetricsError> {
        metrics::efficiency(self.efficiency_input(low))
    }

    pub fn metrics_report(&self, low: LowAdequacy) -> Result<MetricsReport, MetricsError> {
        let classification = self.classification()?;
        Ok(MetricsReport::new(classification, Some(self.efficiency_input(low))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TermSeverity;

    #[test]
    fn low_adequacy_parse() {
        assert_eq!("auto".parse::<LowAdequacy>(), Ok(LowAdequacy::Auto));
        assert_eq!("12".parse::<LowAdequacy>(), Ok(LowAdequacy::Count(12)));
        assert!("-1".parse::<LowAdequacy>().is_err());
    }

    #[test]
    fn sanction_resolves_flag_and_feeds_metrics() {
        let engine = Engine::default();
        for (i, n) in ["John.Spamer", "Ivan.Petrenko", "Anna.Shevchenko"].iter().enumerate() {
            engine.register(&RegistrationRequest::new(*n), Timestamp(i as i64)).unwrap();
        }
        engine.set_status(AccountId(2), AccountStatus::Verified).unwrap();
        engine.set_status(AccountId(3), AccountStatus::Verified).unwrap();
        engine.set_status(AccountId(1), AccountStatus::Verified).unwrap();
        engine
            .stores()
            .write(|s| s.add_prohibited("spam", "c", TermSeverity::Flag))
            .unwrap();
        assert_eq!(engine.scan(Timestamp(10)).len(), 1);
        // 3 verified, 1 open flag -> 3 / 2
        assert_eq!(engine.efficiency(LowAdequacy::Auto), Ok(1.5));
        engine
            .sanction(AccountId(1), SanctionCode::Warning, ReasonCode::ProhibitedContent, "", Timestamp(11))
            .unwrap();
        assert!(engine.open_flags().is_empty());
        assert_eq!(engine.efficiency(LowAdequacy::Auto), Ok(1.0));
        let report = engine.metrics_report(LowAdequacy::Count(3)).unwrap();
        assert!(report.efficiency.is_none());
    }
}
