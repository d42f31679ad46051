use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unicode_script::{Script, UnicodeScript};

/// Script bucket a letter is counted under. Variant order is the tie-break
/// order for the dominant script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptClass {
    Latin,
    Cyrillic,
    Other,
}

impl ScriptClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ScriptClass::Latin => "latin",
            ScriptClass::Cyrillic => "cyrillic",
            ScriptClass::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantScript {
    Latin,
    Cyrillic,
    Other,
    None,
}

impl From<ScriptClass> for DominantScript {
    fn from(c: ScriptClass) -> Self {
        match c {
            ScriptClass::Latin => DominantScript::Latin,
            ScriptClass::Cyrillic => DominantScript::Cyrillic,
            ScriptClass::Other => DominantScript::Other,
        }
    }
}

/// Spelling script of a name, approximated from letter scripts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptReport {
    pub dominant: DominantScript,
    pub mixed: bool,
    pub per_script_counts: BTreeMap<ScriptClass, u32>,
}

impl ScriptReport {
    /// `latin:11,cyrillic:1` style summary.
    pub fn summary(&self) -> String {
        self.per_script_counts
            .iter()
            .map(|(k, v)| format!("{}:{v}", k.as_str()))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn classify(c: char) -> Option<ScriptClass> {
    if !c.is_alphabetic() {
        return None;
    }
    match c.script() {
        Script::Latin => Some(ScriptClass::Latin),
        Script::Cyrillic => Some(ScriptClass::Cyrillic),
        // Alphabetic marks shared across scripts say nothing about spelling.
        Script::Common | Script::Inherited | Script::Unknown => None,
        _ => Some(ScriptClass::Other),
    }
}

/// Counts letters per script and picks the dominant one. Ties resolve in
/// the order Latin, Cyrillic, Other.
pub fn detect_script(raw: &str) -> ScriptReport {
    let mut counts: BTreeMap<ScriptClass, u32> = BTreeMap::new();
    for class in raw.chars().filter_map(classify) {
        *counts.entry(class).or_default() += 1;
    }
    let dominant = counts
        .iter()
        // max_by_key keeps the last maximum; iterate in reverse so the
        // earliest class wins ties.
        .rev()
        .max_by_key(|(_, n)| **n)
        .map(|(c, _)| DominantScript::from(*c))
        .unwrap_or(DominantScript::None);
    ScriptReport {
        dominant,
        mixed: counts.len() >= 2,
        per_script_counts: counts,
    }
}
