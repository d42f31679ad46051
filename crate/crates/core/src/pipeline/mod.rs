//! The verification algorithm: ordered checks over a store snapshot that
//! produce a [`Verdict`], plus registration, rescans, sanctions and the
//! moderator report.
//!
//! Check order is fixed: field presence, `First.Last` format, script mix,
//! prohibited content, blacklist, duplicates, contacts. Every applicable
//! reason is collected; none of the checks short-circuits the others except
//! an empty username, which leaves nothing to check.

mod report;
mod sanction;
mod scan;

use serde::{Deserialize, Serialize};

pub use report::{generate_report, ModerationReport};
pub use sanction::{apply_sanction, rename_account, set_status, RenameOutcome};
pub use scan::{post_registration_scan, Flag, FlagLedger};

use crate::error::StoreError;
use crate::lexicon::{LexiconStores, SharedStores};
use crate::model::{
    Account, AccountStatus, ContactEntry, ContactKind, Reason, ReasonCode, TermSeverity,
    Timestamp, UsernameId, UsernameRecord, Verdict,
};
use crate::text::{detect_script, normalize, parse_format_with, validate_contact, FormatPolicy};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrationRequest {
    pub username: String,
    #[serde(default)]
    pub email: Option<String>,
    #[serde(default)]
    pub extra_contacts: Vec<ContactEntry>,
}

impl RegistrationRequest {
    pub fn new(username: impl Into<String>) -> Self {
        RegistrationRequest {
            username: username.into(),
            ..Default::default()
        }
    }

    pub fn with_email(mut self, email: impl Into<String>) -> Self {
        self.email = Some(email.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub format: FormatPolicy,
}

/// Which name checks run and what counts as a duplicate.
#[derive(Debug, Clone, Copy)]
pub(crate) enum CheckMode {
    /// Pre-registration: flag-severity terms do not block.
    Registration,
    /// Rescan of a registered name: every term counts, and the name's own
    /// record is not a duplicate of itself.
    Rescan { own_record: UsernameId },
    /// Rename of an account: like registration, minus the old record.
    Rename { own_record: UsernameId },
}

pub(crate) fn name_reasons(
    raw: &str,
    stores: &LexiconStores,
    config: &PipelineConfig,
    mode: CheckMode,
) -> Vec<Reason> {
    let mut reasons = Vec::new();
    let normalized = normalize(raw);
    if normalized.is_empty() {
        reasons.push(Reason::new(ReasonCode::MissingField, "username"));
        return reasons;
    }

    let format = parse_format_with(raw, &config.format);
    if !format.valid {
        let violation = format.violation.unwrap_or_else(|| "invalid format".into());
        reasons.push(Reason::new(ReasonCode::FormatViolation, violation));
    }

    let script = detect_script(raw);
    if script.mixed {
        reasons.push(Reason::new(ReasonCode::MixedScript, script.summary()));
    }

    let include_flag_terms = matches!(mode, CheckMode::Rescan { .. });
    for m in stores.match_prohibited(&normalized) {
        if include_flag_terms || m.severity == TermSeverity::Reject {
            reasons.push(Reason::new(ReasonCode::ProhibitedContent, m.detail()));
        }
    }

    if let Some(entry) = stores.is_blacklisted(&normalized) {
        reasons.push(Reason::new(ReasonCode::Blacklisted, entry.normalized_name.clone()));
    }

    let own = match mode {
        CheckMode::Registration => None,
        CheckMode::Rescan { own_record } | CheckMode::Rename { own_record } => Some(own_record),
    };
    for dup in stores.find_duplicates(raw) {
        if Some(dup.id) != own {
            reasons.push(Reason::new(ReasonCode::Duplicate, dup.id.to_string()));
        }
    }
    reasons
}

fn contact_reasons(req: &RegistrationRequest) -> Vec<Reason> {
    let mut reasons = Vec::new();
    if let Some(email) = &req.email {
        if let Some(v) = validate_contact(email).violation {
            reasons.push(Reason::new(ReasonCode::InvalidContact, format!("email: {v}")));
        }
    }
    for (i, c) in req.extra_contacts.iter().enumerate() {
        let problem = match c.kind {
            ContactKind::Email => validate_contact(&c.value).violation,
            ContactKind::Other if c.value.trim().is_empty() => Some("empty value".into()),
            ContactKind::Other => None,
        };
        if let Some(v) = problem {
            reasons.push(Reason::new(
                ReasonCode::InvalidContact,
                format!("contact {}: {v}", i + 1),
            ));
        }
    }
    reasons
}

/// Runs every registration check against one snapshot. Pure and
/// deterministic.
pub fn verify(req: &RegistrationRequest, stores: &LexiconStores) -> Verdict {
    verify_with(req, stores, &PipelineConfig::default())
}

pub fn verify_with(
    req: &RegistrationRequest,
    stores: &LexiconStores,
    config: &PipelineConfig,
) -> Verdict {
    let mut reasons = name_reasons(&req.username, stores, config, CheckMode::Registration);
    reasons.extend(contact_reasons(req));
    Verdict::from_reasons(reasons)
}

/// Result of a registration attempt that did not hit a storage error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Registration {
    Registered {
        account: Account,
        record: UsernameRecord,
    },
    Refused {
        verdict: Verdict,
    },
}

/// Contacts as stored on a new account. Syntactically valid e-mail
/// addresses count as verified; other contacts never do.
fn stored_contacts(req: &RegistrationRequest) -> Vec<ContactEntry> {
    let email = req.email.iter().map(|e| ContactEntry {
        kind: ContactKind::Email,
        value: e.clone(),
        verified: validate_contact(e).valid,
    });
    let extra = req.extra_contacts.iter().map(|c| ContactEntry {
        kind: c.kind,
        value: c.value.clone(),
        verified: c.kind == ContactKind::Email && validate_contact(&c.value).valid,
    });
    email.chain(extra).collect()
}

/// Verifies and, on `Accept`, creates the username record and an account
/// that starts under moderation. Refusals leave the store untouched.
pub fn register(
    req: &RegistrationRequest,
    stores: &SharedStores,
    config: &PipelineConfig,
    now: Timestamp,
) -> Result<Registration, StoreError> {
    let verdict = verify_with(req, &stores.snapshot(), config);
    if !verdict.is_accept() {
        return Ok(Registration::Refused { verdict });
    }
    stores.write(|s| {
        // Re-check inside the writer: another registration may have landed
        // since the snapshot was taken.
        let verdict = verify_with(req, s, config);
        if !verdict.is_accept() {
            return Ok(Registration::Refused { verdict });
        }
        let record_id = s.next_username_id();
        s.upsert_record(record_id, &req.username, now)?;
        let account = Account::new(
            s.next_account_id(),
            record_id,
            stored_contacts(req),
            now,
            AccountStatus::UnderModeration,
        );
        s.insert_account(account.clone())?;
        let record = s
            .record(record_id)
            .cloned()
            .ok_or(StoreError::RecordNotFound(record_id))?;
        Ok(Registration::Registered { account, record })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Decision, SanctionCode};

    fn req(name: &str) -> RegistrationRequest {
        RegistrationRequest::new(name)
    }

    #[test]
    fn clean_name_on_empty_stores() {
        let v = verify(&req("Ivan.Petrenko"), &LexiconStores::default());
        assert_eq!(v.decision(), Decision::Accept);
        assert!(v.reasons().is_empty());
    }

    #[test]
    fn prohibited_rejects() {
        let mut s = LexiconStores::default();
        s.add_prohibited("spam", "spam", TermSeverity::Reject).unwrap();
        let v = verify(&req("Spam.Lord"), &s);
        assert_eq!(v.decision(), Decision::Reject);
        assert_eq!(v.reasons(), &[Reason::new(ReasonCode::ProhibitedContent, "spam@0")]);
    }

    #[test]
    fn flag_terms_do_not_block_registration() {
        let mut s = LexiconStores::default();
        s.add_prohibited("spam", "spam", TermSeverity::Flag).unwrap();
        assert!(verify(&req("Spam.Lord"), &s).is_accept());
    }

    #[test]
    fn space_separator_needs_correction() {
        let v = verify(&req("ivan petrenko"), &LexiconStores::default());
        assert_eq!(v.decision(), Decision::RequireCorrection);
        assert_eq!(v.reasons().len(), 1);
        assert_eq!(v.reasons()[0].code, ReasonCode::FormatViolation);
    }

    #[test]
    fn blacklisted_rejects() {
        let mut s = LexiconStores::default();
        s.add_blacklist("troll.king", SanctionCode::HIGHEST, "abuse", Timestamp(0))
            .unwrap();
        let v = verify(&req("Troll.King"), &s);
        assert_eq!(v.decision(), Decision::Reject);
        assert_eq!(v.reasons(), &[Reason::new(ReasonCode::Blacklisted, "troll.king")]);
    }

    #[test]
    fn empty_username_is_missing_field_only() {
        let v = verify(&req("   "), &LexiconStores::default());
        assert_eq!(v.reasons(), &[Reason::new(ReasonCode::MissingField, "username")]);
        assert_eq!(v.decision(), Decision::RequireCorrection);
    }

    #[test]
    fn collects_every_reason_in_check_order() {
        let mut s = LexiconStores::default();
        s.add_prohibited("troll", "abuse", TermSeverity::Reject).unwrap();
        let v = verify(&req("Troll King").with_email("bad address"), &s);
        let codes: Vec<ReasonCode> = v.reasons().iter().map(|r| r.code).collect();
        assert_eq!(
            codes,
            vec![
                ReasonCode::FormatViolation,
                ReasonCode::ProhibitedContent,
                ReasonCode::InvalidContact,
            ]
        );
        assert_eq!(v.decision(), Decision::Reject);
    }

    #[test]
    fn mixed_script_is_correctable() {
        let v = verify(&req("\u{0406}van.Petrenko"), &LexiconStores::default());
        assert_eq!(v.decision(), Decision::RequireCorrection);
        assert_eq!(v.reasons(), &[Reason::new(ReasonCode::MixedScript, "latin:11,cyrillic:1")]);
    }

    #[test]
    fn extra_contacts_checked() {
        let mut r = req("Ivan.Petrenko");
        r.extra_contacts.push(ContactEntry {
            kind: ContactKind::Email,
            value: "a@b".into(),
            verified: true,
        });
        r.extra_contacts.push(ContactEntry {
            kind: ContactKind::Other,
            value: " ".into(),
            verified: false,
        });
        let v = verify(&r, &LexiconStores::default());
        assert_eq!(v.reasons().len(), 2);
        assert!(v.reasons().iter().all(|r| r.code == ReasonCode::InvalidContact));
    }

    #[test]
    fn register_accept_and_duplicate() {
        let stores = SharedStores::default();
        let cfg = PipelineConfig::default();
        let out = register(&req("Ivan.Petrenko").with_email("ivan@example.org"), &stores, &cfg, Timestamp(10)).unwrap();
        let Registration::Registered { account, record } = out else {
            panic!("expected registration");
        };
        assert_eq!(account.status, AccountStatus::UnderModeration);
        assert_eq!(account.anonymity_level, 1);
        assert_eq!(record.normalized, "ivan.petrenko");
        let snap = stores.snapshot();
        assert_eq!(snap.records().count(), 1);
        assert_eq!(snap.accounts().count(), 1);

        // Cyrillic і folds to i, so this is the same skeleton.
        let out = register(&req("\u{0456}van.Petrenko"), &stores, &cfg, Timestamp(11)).unwrap();
        let Registration::Refused { verdict } = out else {
            panic!("expected refusal");
        };
        assert!(verdict.has(ReasonCode::Duplicate));
    }

    #[test]
    fn refused_registration_keeps_revision() {
        let stores = SharedStores::default();
        let before = stores.snapshot().revision();
        let out = register(&req("ivan petrenko"), &stores, &PipelineConfig::default(), Timestamp(0)).unwrap();
        assert!(matches!(out, Registration::Refused { .. }));
        assert_eq!(stores.snapshot().revision(), before);
    }
}
