//! Pure text layer: normalization, fold tables, the `First.Last` grammar,
//! script detection and contact syntax.

mod contact;
mod fold;
mod format;
mod normalize;
mod script;

pub use contact::{validate_contact, ContactCheck, MAX_EMAIL_LEN};
pub use fold::{confusable_fold, FoldTable, FoldTableError, FoldTables};
pub use format::{parse_format, parse_format_with, FormatParse, FormatPolicy};
pub use normalize::{normalize, NAME_SEPARATOR};
pub use script::{detect_script, DominantScript, ScriptClass, ScriptReport};
