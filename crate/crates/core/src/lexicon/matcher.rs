use aho_corasick::AhoCorasick;
use serde::{Deserialize, Serialize};

use crate::model::{ProhibitedTerm, TermSeverity};

/// One occurrence of a prohibited term in a folded name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermMatch {
    pub term: String,
    /// 0-based character index into the folded name.
    pub offset: usize,
    pub severity: TermSeverity,
}

impl TermMatch {
    /// `term@offset`, the detail string carried by prohibited-content reasons.
    pub fn detail(&self) -> String {
        format!("{}@{}", self.term, self.offset)
    }
}

/// Multi-pattern automaton over the prohibited term set, reporting every
/// overlapping occurrence.
#[derive(Debug, Clone, Default)]
pub struct TermMatcher {
    automaton: Option<AhoCorasick>,
    terms: Vec<(String, TermSeverity)>,
}

impl TermMatcher {
    pub fn new<'a>(terms: impl IntoIterator<Item = &'a ProhibitedTerm>) -> Self {
        let terms: Vec<(String, TermSeverity)> = terms
            .into_iter()
            .filter(|t| !t.term.is_empty())
            .map(|t| (t.term.clone(), t.severity))
            .collect();
        if terms.is_empty() {
            return Self::default();
        }
        let automaton = AhoCorasick::new(terms.iter().map(|(t, _)| t.as_str()))
            .expect("term set fits the automaton size limits");
        TermMatcher {
            automaton: Some(automaton),
            terms,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// All `(term, offset)` occurrences, sorted by offset, then longer terms
    /// first, then term text.
    pub fn find_all(&self, folded: &str) -> Vec<TermMatch> {
        let Some(ac) = &self.automaton else {
            return Vec::new();
        };
        let mut out: Vec<TermMatch> = ac
            .find_overlapping_iter(folded)
            .map(|m| {
                let (term, severity) = &self.terms[m.pattern().as_usize()];
                TermMatch {
                    term: term.clone(),
                    offset: folded[..m.start()].chars().count(),
                    severity: *severity,
                }
            })
            .collect();
        out.sort_by(|a, b| {
            a.offset
                .cmp(&b.offset)
                .then_with(|| b.term.chars().count().cmp(&a.term.chars().count()))
                .then_with(|| a.term.cmp(&b.term))
        });
        out
    }
}
