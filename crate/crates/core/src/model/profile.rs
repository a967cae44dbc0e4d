use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rule::RuleId;
use super::rulebook::Rulebook;

/// Per-rule violation scores of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationProfile {
    pub trajectory_id: String,
    pub scores: BTreeMap<RuleId, f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileMismatch {
    #[error("profile `{profile}` has no score for rule `{rule}`")]
    MissingRule { profile: String, rule: RuleId },
    #[error("profile `{profile}` scores unknown rule `{rule}`")]
    ExtraRule { profile: String, rule: RuleId },
    #[error("profile `{profile}` has an invalid score for rule `{rule}`")]
    InvalidScore { profile: String, rule: RuleId },
}

impl ViolationProfile {
    pub fn new(trajectory_id: impl Into<String>) -> Self {
        ViolationProfile {
            trajectory_id: trajectory_id.into(),
            scores: BTreeMap::new(),
        }
    }

    pub fn from_scores<'a>(
        trajectory_id: impl Into<String>,
        scores: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Self {
        ViolationProfile {
            trajectory_id: trajectory_id.into(),
            scores: scores.into_iter().map(|(k, v)| (RuleId::from(k), v)).collect(),
        }
    }

    pub fn score(&self, rule: &str) -> Option<f64> {
        self.scores.get(rule).copied()
    }

    /// Checks that the profile scores exactly the rules of `rb` with finite,
    /// non-negative values.
    pub fn check_covers(&self, rb: &Rulebook) -> Result<(), ProfileMismatch> {
        for id in rb.rule_ids() {
            match self.scores.get(id) {
                None => {
                    return Err(ProfileMismatch::MissingRule {
                        profile: self.trajectory_id.clone(),
                        rule: id.clone(),
                    })
                }
                Some(v) if !v.is_finite() || *v < 0.0 => {
                    return Err(ProfileMismatch::InvalidScore {
                        profile: self.trajectory_id.clone(),
                        rule: id.clone(),
                    })
                }
                _ => {}
            }
        }
        if let Some(extra) = self.scores.keys().find(|k| !rb.contains(k.as_str())) {
            return Err(ProfileMismatch::ExtraRule {
                profile: self.trajectory_id.clone(),
                rule: extra.clone(),
            });
        }
        Ok(())
    }
}

/// Result of comparing two trajectories under a rulebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonOutcome {
    FirstPreferred,
    SecondPreferred,
    Equivalent,
    Incomparable,
}

impl ComparisonOutcome {
    /// The outcome with the two arguments swapped.
    pub fn flip(self) -> Self {
        match self {
            ComparisonOutcome::FirstPreferred => ComparisonOutcome::SecondPreferred,
            ComparisonOutcome::SecondPreferred => ComparisonOutcome::FirstPreferred,
            other => other,
        }
    }
}
