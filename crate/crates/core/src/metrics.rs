//! Efficiency indicator and the five-cohort account classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::model::{Account, AccountId, AccountStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficiencyInput {
    /// Accounts that completed verification.
    pub n_verified: u64,
    /// Accounts whose data adequacy is low.
    pub n_low_adequacy: u64,
}

/// `n_verified / (n_verified - n_low_adequacy)`, defined only when the two
/// counts differ.
pub fn efficiency(input: EfficiencyInput) -> Result<f64, MetricsError> {
    let EfficiencyInput {
        n_verified,
        n_low_adequacy,
    } = input;
    if n_verified == n_low_adequacy {
        return Err(MetricsError::SideCondition(n_verified));
    }
    if n_low_adequacy > n_verified {
        return Err(MetricsError::LowAdequacyExceedsVerified {
            verified: n_verified,
            low_adequacy: n_low_adequacy,
        });
    }
    Ok(n_verified as f64 / (n_verified - n_low_adequacy) as f64)
}

/// Accounts under moderation or carrying an unresolved flag.
pub fn low_adequacy_count<'a>(
    accounts: impl IntoIterator<Item = &'a Account>,
    open_flags: &BTreeSet<AccountId>,
) -> u64 {
    accounts
        .into_iter()
        .filter(|a| a.status == AccountStatus::UnderModeration || open_flags.contains(&a.id))
        .count() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Reliable,
    Updated,
    UpdatedKeptName,
    Blocked,
    UnderModeration,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Reliable,
        Category::Updated,
        Category::UpdatedKeptName,
        Category::Blocked,
        Category::UnderModeration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Reliable => "reliable",
            Category::Updated => "updated",
            Category::UpdatedKeptName => "updated_kept_name",
            Category::Blocked => "blocked",
            Category::UnderModeration => "under_moderation",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<AccountStatus> for Category {
    fn from(s: AccountStatus) -> Self {
        match s {
            AccountStatus::Verified => Category::Reliable,
            AccountStatus::Corrected => Category::Updated,
            AccountStatus::CorrectedKeptName => Category::UpdatedKeptName,
            AccountStatus::Blocked => Category::Blocked,
            AccountStatus::UnderModeration => Category::UnderModeration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub total: u64,
    pub counts: BTreeMap<Category, u64>,
    pub percentages: BTreeMap<Category, u64>,
}

/// `100 * count / total` rounded to the nearest integer, halves away from
/// zero. Exact integer arithmetic.
pub fn round_percent(count: u64, total: u64) -> u64 {
    debug_assert!(total > 0);
    (200 * count + total) / (2 * total)
}

pub fn classify_accounts<'a>(
    accounts: impl IntoIterator<Item = &'a Account>,
) -> Result<ClassificationReport, MetricsError> {
    classify_statuses(accounts.into_iter().map(|a| a.status))
}

pub fn classify_statuses(
    statuses: impl IntoIterator<Item = AccountStatus>,
) -> Result<ClassificationReport, MetricsError> {
    let mut counts: BTreeMap<Category, u64> = Category::ALL.iter().map(|c| (*c, 0)).collect();
    let mut total = 0u64;
    for s in statuses {
        *counts.entry(Category::from(s)).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(MetricsError::NoAccounts);
    }
    let percentages = counts
        .iter()
        .map(|(c, n)| (*c, round_percent(*n, total)))
        .collect();
    Ok(ClassificationReport {
        total,
        counts,
        percentages,
    })
}

/// Combined metrics document served by the CLI and HTTP API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: u64,
    pub counts: BTreeMap<Category, u64>,
    pub percentages: BTreeMap<Category, u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub efficiency_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub efficiency_input: Option<EfficiencyInput>,
}

impl MetricsReport {
    pub fn new(classification: ClassificationReport, input: Option<EfficiencyInput>) -> Self {
        let result = input.map(efficiency);
        MetricsReport {
            total: classification.total,
            counts: classification.counts,
            percentages: classification.percentages,
            efficiency: result.as_ref().and_then(|r| r.as_ref().ok().copied()),
            efficiency_error: result.and_then(|r| r.err()).map(|e| e.to_string()),
            efficiency_input: input,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<20}{:>8}{:>8}", "category", "count", "pct");
        for c in Category::ALL {
            let _ = writeln!(
                out,
                "{:<20}{:>8}{:>7}%",
                c.as_str(),
                self.counts.get(&c).copied().unwrap_or(0),
                self.percentages.get(&c).copied().unwrap_or(0)
            );
        }
        let _ = writeln!(out, "{:<20}{:>8}", "total", self.total);
        if let Some(input) = self.efficiency_input {
            let _ = writeln!(
                out,
                "verified {}  low adequacy {}",
                input.n_verified, input.n_low_adequacy
            );
        }
        match (&self.efficiency, &self.efficiency_error) {
            (Some(e), _) => {
                let _ = writeln!(out, "efficiency {e:.4}");
            }
            (None, Some(err)) => {
                let _ = writeln!(out, "{err}");
            }
            (None, None) => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eff(v: u64, l: u64) -> Result<f64, MetricsError> {
        efficiency(EfficiencyInput {
            n_verified: v,
            n_low_adequacy: l,
        })
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(eff(100, 50), Ok(2.0));
        assert_eq!(eff(100, 0), Ok(1.0));
        assert_eq!(eff(100, 100), Err(MetricsError::SideCondition(100)));
        assert_eq!(eff(0, 0), Err(MetricsError::SideCondition(0)));
        assert!(matches!(
            eff(10, 11),
            Err(MetricsError::LowAdequacyExceedsVerified { .. })
        ));
    }

    #[test]
    fn rounding_halves_away_from_zero() {
        assert_eq!(round_percent(1, 8), 13); // 12.5
        assert_eq!(round_percent(1, 200), 1); // 0.5
        assert_eq!(round_percent(1, 3), 33);
        assert_eq!(round_percent(2, 3), 67);
        assert_eq!(round_percent(0, 3), 0);
        assert_eq!(round_percent(3, 3), 100);
    }

    #[test]
    fn all_verified() {
        let r = classify_statuses(std::iter::repeat_n(AccountStatus::Verified, 10)).unwrap();
        assert_eq!(r.total, 10);
        assert_eq!(r.counts[&Category::Reliable], 10);
        assert_eq!(r.percentages[&Category::Reliable], 100);
        assert_eq!(r.counts[&Category::Blocked], 0);
    }

    #[test]
    fn empty_set_is_error() {
        assert_eq!(classify_statuses(std::iter::empty()), Err(MetricsError::NoAccounts));
    }

    #[test]
    fn status_mapping_is_one_to_one() {
        let cats: BTreeSet<Category> = AccountStatus::ALL.iter().map(|s| Category::from(*s)).collect();
        assert_eq!(cats.len(), 5);
    }

    #[test]
    fn report_json_shape() {
        let c = classify_statuses([AccountStatus::Verified, AccountStatus::UnderModeration]).unwrap();
        let r = MetricsReport::new(c, Some(EfficiencyInput { n_verified: 2, n_low_adequacy: 1 }));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["total"], 2);
        assert_eq!(v["counts"]["reliable"], 1);
        assert_eq!(v["percentages"]["under_moderation"], 50);
        assert_eq!(v["efficiency"], 2.0);
        assert!(v.get("efficiency_error").is_none());

        let c = classify_statuses([AccountStatus::UnderModeration]).unwrap();
        let r = MetricsReport::new(c, Some(EfficiencyInput { n_verified: 1, n_low_adequacy: 1 }));
        assert!(r.efficiency.is_none());
        assert!(r.to_text().contains("undefined"));
    }
}
