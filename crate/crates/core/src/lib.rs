//! Rulebooks: a finite set of driving rules, each with a violation metric,
//! arranged in a priority pre-order. A rulebook scores trajectories, ranks
//! them, and backs pass/fail verification of planner behavior.

pub mod geometry;
pub mod io;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod ranking;
pub mod verify;

pub use metrics::{evaluate_profile, MetricRegistry};
pub use model::{
    ComparisonOutcome, Rule, RuleId, Rulebook, RulebookError, Scenario, Trajectory,
    ViolationProfile,
};
pub use ranking::{best, compare_dominance, compare_lex, rank, ComparatorKind, RankingStrata};
pub use verify::{check_acceptable, criticality, verify_batch, VerificationReport};
