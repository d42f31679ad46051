use std::path::PathBuf;

use thiserror::Error;

use crate::model::{AccountId, AccountStatus, UsernameId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {kind} token `{value}`")]
pub struct ParseTokenError {
    pub kind: &'static str,
    pub value: String,
}

impl ParseTokenError {
    pub fn new(kind: &'static str, value: impl Into<String>) -> Self {
        ParseTokenError {
            kind,
            value: value.into(),
        }
    }
}

/// Errors raised by store mutators.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("username record {id} already exists with raw name `{existing}`")]
    RecordConflict { id: UsernameId, existing: String },
    #[error("account {0} already exists")]
    AccountConflict(AccountId),
    #[error("prohibited term `{0}` not found")]
    TermNotFound(String),
    #[error("blacklist entry `{0}` not found")]
    BlacklistNotFound(String),
    #[error("account {0} not found")]
    AccountNotFound(AccountId),
    #[error("username record {0} not found")]
    RecordNotFound(UsernameId),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Errors raised when moderating an account.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModerationError {
    #[error("account {0} not found")]
    AccountNotFound(AccountId),
    #[error("account {id} is {status}; operation not permitted")]
    InvalidState { id: AccountId, status: AccountStatus },
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: line {line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}: {message}")]
    Inconsistent { file: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("efficiency undefined: verified count equals low-adequacy count ({0}); the indicator requires them to differ")]
    SideCondition(u64),
    #[error("low-adequacy count {low_adequacy} exceeds verified count {verified}")]
    LowAdequacyExceedsVerified { verified: u64, low_adequacy: u64 },
    #[error("cannot classify an empty account set")]
    NoAccounts,
}
