//! Entities of the information model and the verdict vocabulary shared by
//! every other module.
//!
//! Five entities are linked one-to-many: blacklist entries, accounts,
//! deviations, prohibited terms and username records. All values here are
//! immutable once built; mutation happens through [`crate::lexicon`].

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ParseTokenError;
use crate::text::{FoldTables, ScriptReport};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }
    };
}

id_type!(
    /// Key of a [`UsernameRecord`] (the account's "internet-name code").
    UsernameId
);
id_type!(
    /// Key of an [`Account`].
    AccountId
);
id_type!(
    /// Key of a [`Deviation`].
    DeviationId
);

/// UTC timestamp with one-second resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn now() -> Self {
        Timestamp(Utc::now().timestamp())
    }

    /// ISO-8601 form, e.g. `2024-03-01T12:00:00Z`.
    pub fn to_iso8601(self) -> String {
        match DateTime::<Utc>::from_timestamp(self.0, 0) {
            Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Secs, true),
            None => self.0.to_string(),
        }
    }

    pub fn parse_iso8601(s: &str) -> Option<Self> {
        DateTime::parse_from_rfc3339(s)
            .ok()
            .map(|dt| Timestamp(dt.timestamp()))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso8601())
    }
}

/// Implements `Display`/`FromStr` over a fixed snake_case token table.
macro_rules! token_enum {
    ($name:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ParseTokenError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($token => Ok($name::$variant),)+
                    _ => Err(ParseTokenError::new(stringify!($name), s)),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    MissingField,
    FormatViolation,
    MixedScript,
    ProhibitedContent,
    Blacklisted,
    Duplicate,
    InvalidContact,
}

token_enum!(ReasonCode {
    MissingField => "missing_field",
    FormatViolation => "format_violation",
    MixedScript => "mixed_script",
    ProhibitedContent => "prohibited_content",
    Blacklisted => "blacklisted",
    Duplicate => "duplicate",
    InvalidContact => "invalid_contact",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonSeverity {
    /// The name can never be registered; no correction path.
    Fatal,
    /// The user may resubmit corrected data.
    Correctable,
}

/// Severity of a reason code. Fatal reasons reject, correctable reasons ask
/// for new data.
pub fn reason_severity(code: ReasonCode) -> ReasonSeverity {
    match code {
        ReasonCode::ProhibitedContent | ReasonCode::Blacklisted => ReasonSeverity::Fatal,
        ReasonCode::MissingField
        | ReasonCode::FormatViolation
        | ReasonCode::MixedScript
        | ReasonCode::Duplicate
        | ReasonCode::InvalidContact => ReasonSeverity::Correctable,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Reason {
    pub code: ReasonCode,
    pub detail: String,
}

impl Reason {
    pub fn new(code: ReasonCode, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        debug_assert!(
            !detail.is_empty()
                || !matches!(
                    code,
                    ReasonCode::ProhibitedContent | ReasonCode::Blacklisted | ReasonCode::Duplicate
                ),
            "{code} requires a detail"
        );
        Reason { code, detail }
    }

    pub fn severity(&self) -> ReasonSeverity {
        reason_severity(self.code)
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            write!(f, "{}", self.code)
        } else {
            write!(f, "{}: {}", self.code, self.detail)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    RequireCorrection,
    Reject,
}

token_enum!(Decision {
    Accept => "accept",
    RequireCorrection => "require_correction",
    Reject => "reject",
});

/// Outcome of running a name through the verification checks.
///
/// The decision is derived from the reasons, so `Accept` holds exactly when
/// there are none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    decision: Decision,
    reasons: Vec<Reason>,
}

impl Verdict {
    pub fn from_reasons(reasons: Vec<Reason>) -> Self {
        let decision = if reasons.is_empty() {
            Decision::Accept
        } else if reasons.iter().any(|r| r.severity() == ReasonSeverity::Fatal) {
            Decision::Reject
        } else {
            Decision::RequireCorrection
        };
        Verdict { decision, reasons }
    }

    pub fn accept() -> Self {
        Self::from_reasons(Vec::new())
    }

    pub fn decision(&self) -> Decision {
        self.decision
    }

    pub fn reasons(&self) -> &[Reason] {
        &self.reasons
    }

    pub fn is_accept(&self) -> bool {
        self.decision == Decision::Accept
    }

    pub fn has(&self, code: ReasonCode) -> bool {
        self.reasons.iter().any(|r| r.code == code)
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            decision: Decision,
            reasons: Vec<Reason>,
        }
        let raw = Raw::deserialize(d)?;
        let verdict = Verdict::from_reasons(raw.reasons);
        if verdict.decision != raw.decision {
            return Err(serde::de::Error::custom(format!(
                "decision `{}` inconsistent with reasons (expected `{}`)",
                raw.decision, verdict.decision
            )));
        }
        Ok(verdict)
    }
}

/// A registered internet name with its derived forms.
///
/// `normalized` and `skeleton` are always recomputed from `raw`, so the
/// record cannot drift from the normalization rules it was built with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsernameRecord {
    pub id: UsernameId,
    pub raw: String,
    pub normalized: String,
    pub skeleton: String,
    pub script: ScriptReport,
    pub created_at: Timestamp,
}

impl UsernameRecord {
    pub fn new(id: UsernameId, raw: &str, tables: &FoldTables, created_at: Timestamp) -> Self {
        let normalized = crate::text::normalize(raw);
        let skeleton = tables.fold(&normalized);
        UsernameRecord {
            id,
            raw: raw.to_owned(),
            normalized,
            skeleton,
            script: crate::text::detect_script(raw),
            created_at,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    Email,
    Other,
}

token_enum!(ContactKind {
    Email => "email",
    Other => "other",
});

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContactEntry {
    pub kind: ContactKind,
    pub value: String,
    #[serde(default)]
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnonymityClass {
    Identified,
    PartiallyAnonymous,
    Anonymous,
}

impl AnonymityClass {
    pub fn from_level(level: u8) -> Self {
        match level {
            0 => AnonymityClass::Anonymous,
            1 | 2 => AnonymityClass::PartiallyAnonymous,
            _ => AnonymityClass::Identified,
        }
    }
}

/// Highest anonymity level; reached with three verified contacts.
pub const MAX_ANONYMITY_LEVEL: u8 = 3;

/// Number of verified contacts, capped at [`MAX_ANONYMITY_LEVEL`].
pub fn anonymity_level(contacts: &[ContactEntry]) -> u8 {
    let verified = contacts.iter().filter(|c| c.verified).count();
    verified.min(MAX_ANONYMITY_LEVEL as usize) as u8
}

/// Lifecycle status of an account. One variant per classification cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountStatus {
    Verified,
    Corrected,
    CorrectedKeptName,
    UnderModeration,
    Blocked,
}

token_enum!(AccountStatus {
    Verified => "verified",
    Corrected => "corrected",
    CorrectedKeptName => "corrected_kept_name",
    UnderModeration => "under_moderation",
    Blocked => "blocked",
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: AccountId,
    pub username_id: UsernameId,
    pub anonymity_class: AnonymityClass,
    pub anonymity_level: u8,
    pub contacts: Vec<ContactEntry>,
    pub registered_at: Timestamp,
    pub status: AccountStatus,
}

impl Account {
    /// Builds an account, deriving the anonymity level and class from the
    /// verified contacts.
    pub fn new(
        id: AccountId,
        username_id: UsernameId,
        contacts: Vec<ContactEntry>,
        registered_at: Timestamp,
        status: AccountStatus,
    ) -> Self {
        let level = anonymity_level(&contacts);
        Account {
            id,
            username_id,
            anonymity_class: AnonymityClass::from_level(level),
            anonymity_level: level,
            contacts,
            registered_at,
            status,
        }
    }
}

/// Rung on the sanction ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SanctionCode {
    Warning = 1,
    ForcedRename = 2,
    TemporaryBlock = 3,
    /// Permanent block plus blacklist insertion of the normalized name.
    PermanentBlock = 4,
}

impl SanctionCode {
    pub const HIGHEST: SanctionCode = SanctionCode::PermanentBlock;

    pub fn level(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for SanctionCode {
    type Error = ParseTokenError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(SanctionCode::Warning),
            2 => Ok(SanctionCode::ForcedRename),
            3 => Ok(SanctionCode::TemporaryBlock),
            4 => Ok(SanctionCode::PermanentBlock),
            _ => Err(ParseTokenError::new("SanctionCode", v.to_string())),
        }
    }
}

impl From<SanctionCode> for u8 {
    fn from(c: SanctionCode) -> u8 {
        c.level()
    }
}

impl fmt::Display for SanctionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.level())
    }
}

impl FromStr for SanctionCode {
    type Err = ParseTokenError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u8>()
            .map_err(|_| ParseTokenError::new("SanctionCode", s))
            .and_then(SanctionCode::try_from)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlacklistEntry {
    pub normalized_name: String,
    pub sanction_code: SanctionCode,
    pub reason: String,
    pub created_at: Timestamp,
}

/// A recorded rule violation and the sanction applied for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub id: DeviationId,
    pub account_id: AccountId,
    pub rule_code: ReasonCode,
    pub sanction_code: SanctionCode,
    pub note: String,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermSeverity {
    /// A match rejects the name at registration.
    Reject,
    /// A match is let through at registration but flagged for moderators.
    Flag,
}

token_enum!(TermSeverity {
    Reject => "reject",
    Flag => "flag",
});

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProhibitedTerm {
    pub term: String,
    pub category: String,
    pub severity: TermSeverity,
}
