//! Character fold tables used to build name skeletons.
//!
//! Table files are UTF-8, one mapping per line:
//! `<source-codepoint-hex><TAB><replacement-text>`, with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

const LEET_TSV: &str = include_str!("../../data/leet.tsv");
const CONFUSABLES_TSV: &str = include_str!("../../data/confusables.tsv");

#[derive(Debug, Error)]
pub enum FoldTableError {
    #[error("{source_name}: line {line}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Single-character replacement table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FoldTable {
    entries: BTreeMap<char, String>,
}

impl FoldTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Built-in digit/symbol table (`0→o`, `1→i`, `4→a`, ...).
    pub fn leet() -> Self {
        Self::parse(LEET_TSV, "leet.tsv").expect("built-in leet table is well-formed")
    }

    /// Built-in Cyrillic → Latin look-alike table.
    pub fn confusables() -> Self {
        Self::parse(CONFUSABLES_TSV, "confusables.tsv")
            .expect("built-in confusable table is well-formed")
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (char, S)>,
        S: Into<String>,
    {
        FoldTable {
            entries: pairs.into_iter().map(|(c, s)| (c, s.into())).collect(),
        }
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, FoldTableError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let malformed = |message: String| FoldTableError::Malformed {
                source_name: source_name.to_owned(),
                line: idx + 1,
                message,
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (hex, replacement) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected `<hex><TAB><replacement>`".into()))?;
            let cp = u32::from_str_radix(hex.trim(), 16)
                .map_err(|_| malformed(format!("bad code point `{hex}`")))?;
            let ch = char::from_u32(cp)
                .ok_or_else(|| malformed(format!("U+{cp:04X} is not a scalar value")))?;
            if entries.insert(ch, replacement.to_owned()).is_some() {
                return Err(malformed(format!("duplicate entry for U+{cp:04X}")));
            }
        }
        Ok(FoldTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self, FoldTableError> {
        let text = std::fs::read_to_string(path).map_err(|source| FoldTableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Serializes in the same line format `parse` reads.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (c, r) in &self.entries {
            let _ = writeln!(out, "{:04X}\t{}", *c as u32, r);
        }
        out
    }

    pub fn get(&self, c: char) -> Option<&str> {
        self.entries.get(&c).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &str)> {
        self.entries.iter().map(|(c, s)| (*c, s.as_str()))
    }

    /// True when no replacement text contains a character that the table
    /// itself would rewrite, i.e. folding is idempotent.
    pub fn is_stable(&self) -> bool {
        self.entries
            .values()
            .all(|r| r.chars().all(|c| !self.entries.contains_key(&c)))
    }

    /// Replaces every character with an entry; all others pass through.
    pub fn apply(&self, input: &str) -> String {
        confusable_fold(input, self)
    }
}

/// Replaces each character of `normalized` that has an entry in `table`.
pub fn confusable_fold(normalized: &str, table: &FoldTable) -> String {
    let mut out = String::with_capacity(normalized.len());
    for c in normalized.chars() {
        match table.entries.get(&c) {
            Some(r) => out.push_str(r),
            None => out.push(c),
        }
    }
    out
}

/// The leet and confusable tables, plus their union used for skeletons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldTables {
    leet: FoldTable,
    confusable: FoldTable,
    combined: FoldTable,
}

impl FoldTables {
    /// Confusable entries win where both tables map the same character.
    pub fn new(leet: FoldTable, confusable: FoldTable) -> Self {
        let mut combined = leet.clone();
        combined.entries.extend(
            confusable
                .entries
                .iter()
                .map(|(c, s)| (*c, s.clone())),
        );
        FoldTables {
            leet,
            confusable,
            combined,
        }
    }

    pub fn empty() -> Self {
        Self::new(FoldTable::new(), FoldTable::new())
    }

    pub fn leet(&self) -> &FoldTable {
        &self.leet
    }

    pub fn confusable(&self) -> &FoldTable {
        &self.confusable
    }

    pub fn combined(&self) -> &FoldTable {
        &self.combined
    }

    /// Skeleton of an already normalized name.
    pub fn fold(&self, normalized: &str) -> String {
        confusable_fold(normalized, &self.combined)
    }
}

impl Default for FoldTables {
    fn default() -> Self {
        Self::new(FoldTable::leet(), FoldTable::confusables())
    }
}
