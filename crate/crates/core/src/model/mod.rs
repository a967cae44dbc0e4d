//! Domain types: rules, rulebooks and their priority algebra, trajectories,
//! scenarios and violation profiles.

mod aggregate;
mod profile;
mod rule;
mod rulebook;
mod scenario;
mod trajectory;

pub use aggregate::{AggregateMember, AggregateSpec, Combiner, AGGREGATE_METRIC};
pub use profile::{ComparisonOutcome, ProfileMismatch, ViolationProfile};
pub use rule::{MetricBinding, Rule, RuleId};
pub use rulebook::{Priority, Rulebook, RulebookError, DEFAULT_RULEBOOK_ID};
pub use scenario::{EgoDims, Goal, Obstacle, ObstacleFootprint, Scenario, ScenarioError};
pub use trajectory::{EgoState, Trajectory, TrajectoryError, DT_TOL};
