use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{ReasonCode, Timestamp};

use super::Flag;

/// Flags grouped for the moderator by their first reason code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModerationReport {
    pub generated_at: Timestamp,
    pub flags: BTreeMap<ReasonCode, Vec<Flag>>,
    /// One entry per reason code, zero included.
    pub counts: BTreeMap<ReasonCode, usize>,
}

/// Groups flags by primary reason code, in code order, then by detection
/// time. The result does not depend on the input order.
pub fn generate_report(flags: &[Flag], generated_at: Timestamp) -> ModerationReport {
    let mut grouped: BTreeMap<ReasonCode, Vec<Flag>> = BTreeMap::new();
    for flag in flags {
        if let Some(code) = flag.primary_code() {
            grouped.entry(code).or_default().push(flag.clone());
        }
    }
    for group in grouped.values_mut() {
        group.sort_by(|a, b| {
            (a.detected_at, a.account_id, a.store_revision, &a.reasons)
                .cmp(&(b.detected_at, b.account_id, b.store_revision, &b.reasons))
        });
    }
    let counts = ReasonCode::ALL
        .iter()
        .map(|c| (*c, grouped.get(c).map_or(0, Vec::len)))
        .collect();
    ModerationReport {
        generated_at,
        flags: grouped,
        counts,
    }
}

impl ModerationReport {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "moderation report  {}", self.generated_at);
        let _ = writeln!(out, "flags: {}", self.total());
        for (code, n) in &self.counts {
            let _ = writeln!(out, "  {:<20}{n}", code.as_str());
        }
        for (code, flags) in &self.flags {
            let _ = writeln!(out, "\n[{code}]");
            for f in flags {
                let reasons: Vec<String> = f.reasons.iter().map(ToString::to_string).collect();
                let _ = writeln!(
                    out,
                    "  account {}  rev {}  {}",
                    f.account_id,
                    f.store_revision,
                    reasons.join("; ")
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AccountId, Reason};

    fn flag(account: u64, code: ReasonCode, at: i64) -> Flag {
        Flag {
            account_id: AccountId(account),
            reasons: vec![Reason::new(code, "x")],
            detected_at: Timestamp(at),
            store_revision: 1,
        }
    }

    #[test]
    fn empty_report_has_zero_counts() {
        let r = generate_report(&[], Timestamp(0));
        assert_eq!(r.counts.len(), ReasonCode::ALL.len());
        assert!(r.counts.values().all(|n| *n == 0));
        assert!(r.flags.is_empty());
    }

    #[test]
    fn counts_by_primary_code() {
        let flags = [
            flag(1, ReasonCode::ProhibitedContent, 3),
            flag(2, ReasonCode::Duplicate, 1),
            flag(3, ReasonCode::ProhibitedContent, 2),
        ];
        let r = generate_report(&flags, Timestamp(9));
        assert_eq!(r.counts[&ReasonCode::ProhibitedContent], 2);
        assert_eq!(r.counts[&ReasonCode::Duplicate], 1);
        assert_eq!(r.total(), 3);
        let order: Vec<u64> = r.flags[&ReasonCode::ProhibitedContent]
            .iter()
            .map(|f| f.account_id.0)
            .collect();
        assert_eq!(order, vec![3, 1]);
    }

    #[test]
    fn permutation_invariant() {
        let flags = vec![
            flag(1, ReasonCode::ProhibitedContent, 3),
            flag(2, ReasonCode::Duplicate, 1),
            flag(3, ReasonCode::ProhibitedContent, 3),
            flag(4, ReasonCode::MixedScript, 0),
        ];
        let base = generate_report(&flags, Timestamp(0));
        let mut rev = flags.clone();
        rev.reverse();
        assert_eq!(generate_report(&rev, Timestamp(0)), base);
        let mut rot = flags;
        rot.rotate_left(2);
        assert_eq!(generate_report(&rot, Timestamp(0)), base);
    }

    #[test]
    fn text_rendering_lists_groups() {
        let r = generate_report(&[flag(7, ReasonCode::Duplicate, 0)], Timestamp(0));
        let text = r.to_text();
        assert!(text.contains("[duplicate]"));
        assert!(text.contains("account 7"));
    }
}
