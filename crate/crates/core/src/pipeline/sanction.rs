use serde::Serialize;

use crate::error::{ModerationError, StoreError};
use crate::lexicon::{Revision, SharedStores};
use crate::model::{
    AccountId, AccountStatus, Deviation, ReasonCode, SanctionCode, Timestamp, UsernameRecord,
    Verdict,
};

use super::{contact_reasons, name_reasons, CheckMode, PipelineConfig, RegistrationRequest};

/// Records a deviation and applies the sanction's effect on the account.
///
/// * 1 warning: status unchanged.
/// * 2 forced rename: account goes back under moderation until renamed.
/// * 3 temporary block: account blocked; the note carries the expiry.
/// * 4 permanent block: account blocked and its normalized name blacklisted.
pub fn apply_sanction(
    stores: &SharedStores,
    account_id: AccountId,
    code: SanctionCode,
    rule_code: ReasonCode,
    note: &str,
    now: Timestamp,
) -> Result<Deviation, ModerationError> {
    stores.write(|s| {
        let account = s
            .account(account_id)
            .ok_or(ModerationError::AccountNotFound(account_id))?;
        if account.status == AccountStatus::Blocked {
            return Err(ModerationError::InvalidState {
                id: account_id,
                status: account.status,
            });
        }
        let note = match (code, note.trim().is_empty()) {
            (SanctionCode::TemporaryBlock, true) => "temporary block",
            _ => note,
        };
        let deviation = s.record_deviation(account_id, rule_code, code, note, now)?;
        match code {
            SanctionCode::Warning => {}
            SanctionCode::ForcedRename => {
                s.set_account_status(account_id, AccountStatus::UnderModeration)?;
            }
            SanctionCode::TemporaryBlock => {
                s.set_account_status(account_id, AccountStatus::Blocked)?;
            }
            SanctionCode::PermanentBlock => {
                let name = s
                    .account_record(account_id)
                    .map(|r| r.normalized.clone())
                    .ok_or(ModerationError::AccountNotFound(account_id))?;
                s.set_account_status(account_id, AccountStatus::Blocked)?;
                s.add_blacklist(&name, code, note, now)?;
            }
        }
        Ok(deviation)
    })
}

/// Moderator status change: approve (`Verified`), exempt from renaming
/// (`CorrectedKeptName`), or lift a block back to `UnderModeration`.
/// Blocking goes through [`apply_sanction`] instead.
pub fn set_status(
    stores: &SharedStores,
    account_id: AccountId,
    status: AccountStatus,
) -> Result<Revision, ModerationError> {
    if status == AccountStatus::Blocked {
        return Err(StoreError::InvalidInput("accounts are blocked through sanctions".into()).into());
    }
    stores.write(|s| {
        if s.account(account_id).is_none() {
            return Err(ModerationError::AccountNotFound(account_id));
        }
        Ok(s.set_account_status(account_id, status)?)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RenameOutcome {
    Renamed { record: UsernameRecord },
    Refused { verdict: Verdict },
}

/// Replaces an account's name after running the registration checks on the
/// new one. The account's current record does not count as a duplicate.
/// A successful rename marks the account `Corrected`.
pub fn rename_account(
    stores: &SharedStores,
    config: &PipelineConfig,
    account_id: AccountId,
    new_raw: &str,
    now: Timestamp,
) -> Result<RenameOutcome, ModerationError> {
    stores.write(|s| {
        let account = s
            .account(account_id)
            .ok_or(ModerationError::AccountNotFound(account_id))?;
        if account.status == AccountStatus::Blocked {
            return Err(ModerationError::InvalidState {
                id: account_id,
                status: account.status,
            });
        }
        let old = account.username_id;
        let mut reasons = name_reasons(new_raw, s, config, CheckMode::Rename { own_record: old });
        reasons.extend(contact_reasons(&RegistrationRequest::new(new_raw)));
        let verdict = Verdict::from_reasons(reasons);
        if !verdict.is_accept() {
            return Ok(RenameOutcome::Refused { verdict });
        }
        let id = s.next_username_id();
        s.upsert_record(id, new_raw, now)?;
        s.set_account_username(account_id, id)?;
        s.remove_record(old)?;
        s.set_account_status(account_id, AccountStatus::Corrected)?;
        let record = s.record(id).cloned().ok_or(StoreError::RecordNotFound(id))?;
        Ok(RenameOutcome::Renamed { record })
    })
}
