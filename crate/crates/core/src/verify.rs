//! Acceptability checks, criticality tagging, and batch verification.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{evaluate_profile, MetricRegistry};
use crate::model::{ProfileMismatch, RuleId, Rulebook, RulebookError, Scenario, Trajectory, ViolationProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Rulebook(#[from] RulebookError),
    #[error(transparent)]
    ProfileRuleMismatch(#[from] ProfileMismatch),
    #[error("nothing to verify")]
    EmptyInput,
    #[error("reports come from different rulebooks: `{0}` and `{1}`")]
    MixedRulebooks(String, String),
}

/// Outcome of checking a profile against the rules' acceptable violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acceptability {
    pub pass: bool,
    /// Rules whose score exceeds their threshold, in rulebook order.
    pub violated: Vec<RuleId>,
}

/// Pass iff no rule with a threshold scores above it.
pub fn check_acceptable(rb: &Rulebook, p: &ViolationProfile) -> Result<Acceptability, ProfileMismatch> {
    check_acceptable_within(rb, p, 0.0)
}

/// As [`check_acceptable`], treating scores within `eps` of a threshold as
/// meeting it.
pub fn check_acceptable_within(
    rb: &Rulebook,
    p: &ViolationProfile,
    eps: f64,
) -> Result<Acceptability, ProfileMismatch> {
    p.check_covers(rb)?;
    let violated: Vec<RuleId> = rb
        .rules()
        .iter()
        .filter(|r| matches!(r.acceptable_violation, Some(t) if p.scores[&r.id] > t + eps))
        .map(|r| r.id.clone())
        .collect();
    Ok(Acceptability {
        pass: violated.is_empty(),
        violated,
    })
}

/// How alarming a case is, by the number and rank of rules it violates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalityTag {
    /// Violated-rule counts per priority level, highest level first.
    pub counts: Vec<u32>,
    /// Single number ordered like `counts` read lexicographically.
    pub scalar: u64,
}

/// Encodes per-level counts, each at most `max_per_level`, as digits in base
/// `max_per_level + 1`. Saturates at `u64::MAX` for very deep hierarchies.
pub fn criticality_scalar(counts: &[u32], max_per_level: u32) -> u64 {
    let base = u64::from(max_per_level) + 1;
    counts.iter().fold(0u64, |acc, &n| {
        acc.saturating_mul(base).saturating_add(u64::from(n))
    })
}

/// Criticality of a profile. A rule counts as violated when it is flagged
/// for counting and its score exceeds its threshold (0 when it has none).
pub fn criticality(rb: &Rulebook, p: &ViolationProfile) -> Result<CriticalityTag, VerifyError> {
    criticality_within(rb, p, 0.0)
}

pub fn criticality_within(
    rb: &Rulebook,
    p: &ViolationProfile,
    eps: f64,
) -> Result<CriticalityTag, VerifyError> {
    let levels = rb.priority_levels()?;
    p.check_covers(rb)?;
    let counts: Vec<u32> = levels
        .iter()
        .map(|level| {
            level
                .iter()
                .filter(|id| {
                    let rule = rb.rule(id.as_str()).expect("level member");
                    rule.count_in_criticality && p.scores[*id] > counting_threshold(rule.acceptable_violation) + eps
                })
                .count() as u32
        })
        .collect();
    let max = levels.iter().map(Vec::len).max().unwrap_or(0) as u32;
    Ok(CriticalityTag {
        scalar: criticality_scalar(&counts, max),
        counts,
    })
}

fn counting_threshold(t: Option<f64>) -> f64 {
    t.unwrap_or(0.0)
}

/// One input of a batch: either loaded documents or the reason they could
/// not be loaded.
#[derive(Debug, Clone)]
pub enum BatchCase {
    Loaded {
        scenario: Scenario,
        trajectory: Trajectory,
    },
    Failed {
        scenario: String,
        trajectory: String,
        error: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Fail,
    Error,
}

/// One row of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub scenario_id: String,
    pub trajectory_id: String,
    pub status: CaseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<BTreeMap<RuleId, f64>>,
    #[serde(default)]
    pub violated: Vec<RuleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criticality: Option<CriticalityTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.status == CaseStatus::Pass
    }
}

/// Violation statistics of one rule over the evaluated cases of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleAggregate {
    pub rule: RuleId,
    /// Score above which a case counts as violating the rule.
    pub counting_threshold: f64,
    pub evaluated: usize,
    pub violations: usize,
    pub frequency: f64,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub rules: Vec<RuleAggregate>,
    /// Indices of cases with nonzero criticality, most critical first.
    pub critical: Vec<usize>,
}

impl Aggregates {
    /// Recomputes the aggregates from report rows. `rules` supplies rule ids
    /// with their counting thresholds, in report order.
    pub fn compute(cases: &[CaseReport], rules: &[(RuleId, f64)], eps: f64) -> Aggregates {
        let evaluated: Vec<&BTreeMap<RuleId, f64>> =
            cases.iter().filter_map(|c| c.scores.as_ref()).collect();
        let n = evaluated.len();
        let rules = rules
            .iter()
            .map(|(id, threshold)| {
                let scores: Vec<f64> = evaluated.iter().filter_map(|s| s.get(id).copied()).collect();
                let violations = scores.iter().filter(|&&s| s > threshold + eps).count();
                let (frequency, mean_score) = if scores.is_empty() {
                    (0.0, 0.0)
                } else {
                    let k = scores.len() as f64;
                    (violations as f64 / k, scores.iter().sum::<f64>() / k)
                };
                RuleAggregate {
                    rule: id.clone(),
                    counting_threshold: *threshold,
                    evaluated: n,
                    violations,
                    frequency,
                    mean_score,
                }
            })
            .collect();
        let mut critical: Vec<(usize, u64)> = cases
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.criticality.as_ref().map(|t| (i, t.scalar)))
            .filter(|&(_, s)| s > 0)
            .collect();
        critical.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let count = |st: CaseStatus| cases.iter().filter(|c| c.status == st).count();
        Aggregates {
            cases: cases.len(),
            passed: count(CaseStatus::Pass),
            failed: count(CaseStatus::Fail),
            errored: count(CaseStatus::Error),
            rules,
            critical: critical.into_iter().map(|(i, _)| i).collect(),
        }
    }

    /// The rule list with thresholds, as needed by [`Aggregates::compute`].
    pub fn rule_thresholds(&self) -> Vec<(RuleId, f64)> {
        self.rules
            .iter()
            .map(|r| (r.rule.clone(), r.counting_threshold))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub rulebook_id: String,
    /// Tolerance used when comparing scores against thresholds.
    pub epsilon: f64,
    pub cases: Vec<CaseReport>,
    pub aggregates: Aggregates,
}

impl VerificationReport {
    pub fn failing_cases(&self) -> impl Iterator<Item = &CaseReport> {
        self.cases.iter().filter(|c| !c.passed())
    }

    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(CaseReport::passed)
    }

    /// Aggregates recomputed from the rows; equal to `aggregates` for any
    /// report produced by [`verify_batch`].
    pub fn recompute_aggregates(&self) -> Aggregates {
        Aggregates::compute(&self.cases, &self.aggregates.rule_thresholds(), self.epsilon)
    }
}

fn evaluate_case(
    rb: &Rulebook,
    case: &BatchCase,
    registry: &MetricRegistry,
    eps: f64,
    total: bool,
) -> CaseReport {
    let (scenario, trajectory) = match case {
        BatchCase::Failed {
            scenario,
            trajectory,
            error,
        } => return errored(scenario, trajectory, error.clone()),
        BatchCase::Loaded {
            scenario,
            trajectory,
        } => (scenario, trajectory),
    };
    let profile = match evaluate_profile(rb, trajectory, scenario, registry) {
        Ok(p) => p,
        Err(e) => return errored(&scenario.id, &trajectory.id, e.to_string()),
    };
    let acc = check_acceptable_within(rb, &profile, eps).expect("profile covers rulebook");
    let criticality = total.then(|| criticality_within(rb, &profile, eps).expect("total hierarchy"));
    CaseReport {
        scenario_id: scenario.id.clone(),
        trajectory_id: trajectory.id.clone(),
        status: if acc.pass { CaseStatus::Pass } else { CaseStatus::Fail },
        scores: Some(profile.scores),
        violated: acc.violated,
        criticality,
        error: None,
    }
}

fn errored(scenario: &str, trajectory: &str, error: String) -> CaseReport {
    CaseReport {
        scenario_id: scenario.to_owned(),
        trajectory_id: trajectory.to_owned(),
        status: CaseStatus::Error,
        scores: None,
        violated: Vec::new(),
        criticality: None,
        error: Some(error),
    }
}

/// Scores every case, checks acceptability and tags criticality. Cases are
/// evaluated in parallel; rows keep input order. A case that cannot be
/// evaluated is recorded as errored. Criticality is omitted when the
/// rulebook is not a total hierarchy.
pub fn verify_batch(
    rb: &Rulebook,
    cases: &[BatchCase],
    registry: &MetricRegistry,
    eps: f64,
) -> Result<VerificationReport, VerifyError> {
    if cases.is_empty() {
        return Err(VerifyError::EmptyInput);
    }
    let total = rb.priority_levels().is_ok();
    let rows: Vec<CaseReport> = cases
        .par_iter()
        .map(|c| evaluate_case(rb, c, registry, eps, total))
        .collect();
    let thresholds: Vec<(RuleId, f64)> = rb
        .rules()
        .iter()
        .map(|r| (r.id.clone(), counting_threshold(r.acceptable_violation)))
        .collect();
    let aggregates = Aggregates::compute(&rows, &thresholds, eps);
    Ok(VerificationReport {
        rulebook_id: rb.id().to_owned(),
        epsilon: eps,
        cases: rows,
        aggregates,
    })
}

/// Per-rule statistics merged across reports of one rulebook, weighted by
/// evaluated-case counts and sorted most-violated first.
pub fn rule_difficulty_stats(reports: &[VerificationReport]) -> Result<Vec<RuleAggregate>, VerifyError> {
    let first = reports.first().ok_or(VerifyError::EmptyInput)?;
    if let Some(other) = reports.iter().find(|r| r.rulebook_id != first.rulebook_id) {
        return Err(VerifyError::MixedRulebooks(
            first.rulebook_id.clone(),
            other.rulebook_id.clone(),
        ));
    }
    let mut merged: Vec<RuleAggregate> = Vec::new();
    let mut score_sums: Vec<f64> = Vec::new();
    for report in reports {
        for agg in &report.aggregates.rules {
            let i = match merged.iter().position(|m| m.rule == agg.rule) {
                Some(i) => i,
                None => {
                    merged.push(RuleAggregate {
                        evaluated: 0,
                        violations: 0,
                        frequency: 0.0,
                        mean_score: 0.0,
                        ..agg.clone()
                    });
                    score_sums.push(0.0);
                    merged.len() - 1
                }
            };
            merged[i].evaluated += agg.evaluated;
            merged[i].violations += agg.violations;
            score_sums[i] += agg.mean_score * agg.evaluated as f64;
        }
    }
    for (m, sum) in merged.iter_mut().zip(&score_sums) {
        if m.evaluated > 0 {
            m.frequency = m.violations as f64 / m.evaluated as f64;
            m.mean_score = sum / m.evaluated as f64;
        }
    }
    merged.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then(b.mean_score.total_cmp(&a.mean_score))
            .then(a.rule.cmp(&b.rule))
    });
    Ok(merged)
}
