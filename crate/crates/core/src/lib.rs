//! Username verification for online communities.
//!
//! Names are normalized, checked against the `First.Last` format, screened
//! against prohibited content, the blacklist and the registry of existing
//! names, and then either accepted, sent back for correction, or rejected.
//! Accounts registered through the pipeline can be rescanned after the
//! lexicons change, sanctioned, and summarized in moderation metrics.

pub mod engine;
pub mod error;
pub mod lexicon;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod text;

pub use engine::{Engine, LowAdequacy};
pub use error::{MetricsError, ModerationError, ParseTokenError, PersistError, StoreError};
pub use lexicon::{LexiconStores, Revision, SharedStores, TermMatch};
pub use model::*;
pub use text::{
    confusable_fold, detect_script, normalize, parse_format, validate_contact, FoldTable,
    FoldTables, FormatParse, FormatPolicy, ScriptReport,
};
pub use metrics::{
    classify_accounts, efficiency, Category, ClassificationReport, EfficiencyInput, MetricsReport,
};
pub use pipeline::{
    generate_report, post_registration_scan, verify, Flag, FlagLedger, ModerationReport,
    PipelineConfig, Registration, RegistrationRequest, RenameOutcome,
};
