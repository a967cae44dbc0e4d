//! Violation metrics and the registry that binds rules to them.
//!
//! Built-in metrics and their parameter objects:
//!
//! * `clearance`: `{base_clearance, category_offsets?, speed_gain?, mode?}`
//!   where `mode` is `"fraction"` (default) or `"shortfall"`. See
//!   [`ClearanceParams`].
//! * `stay_in_lane`: no parameters.
//! * `time_to_goal`: no parameters.
//! * `aggregate`: produced by rule aggregation,
//!   `{combiner, weights?, members: [{id, metric}]}`.

mod clearance;
mod goal;
mod lane;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{Map, Value};
use thiserror::Error;

pub use clearance::{
    clearance_violation, closing_speed, required_clearance, ClearanceMode, ClearanceParams,
};
pub use goal::time_to_goal_violation;
pub use lane::lane_violation;

use crate::model::{
    AggregateSpec, MetricBinding, RuleId, Rulebook, Scenario, ScenarioError, Trajectory,
    TrajectoryError, ViolationProfile, AGGREGATE_METRIC, DT_TOL,
};

pub const CLEARANCE: &str = "clearance";
pub const STAY_IN_LANE: &str = "stay_in_lane";
pub const TIME_TO_GOAL: &str = "time_to_goal";

pub type Params = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("trajectory has no states")]
    EmptyTrajectory,
    #[error("scenario defines no lanes")]
    NoLanesDefined,
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("invalid parameters for metric `{metric}`: {message}")]
    InvalidParams { metric: String, message: String },
    #[error("metric `{metric}` produced invalid score {value}")]
    InvalidScore { metric: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("invalid trajectory: {0}")]
    Trajectory(#[from] TrajectoryError),
    #[error("trajectory step {trajectory} s does not match scenario step {scenario} s")]
    DtMismatch { trajectory: f64, scenario: f64 },
    #[error("trajectory has {states} states but the scenario horizon allows {max}")]
    ExceedsHorizon { states: usize, max: usize },
    #[error("rule `{rule}`: {source}")]
    Rule {
        rule: RuleId,
        #[source]
        source: MetricError,
    },
}

/// A computable violation metric.
pub trait Metric: Send + Sync {
    fn validate_params(&self, params: &Params) -> Result<(), String>;

    fn evaluate(
        &self,
        traj: &Trajectory,
        scenario: &Scenario,
        params: &Params,
    ) -> Result<f64, MetricError>;
}

fn decode<T: serde::de::DeserializeOwned>(params: &Params) -> Result<T, String> {
    serde_json::from_value(Value::Object(params.clone())).map_err(|e| e.to_string())
}

fn expect_no_params(params: &Params) -> Result<(), String> {
    match params.keys().next() {
        None => Ok(()),
        Some(k) => Err(format!("unexpected parameter `{k}`")),
    }
}

struct ClearanceMetric;

impl Metric for ClearanceMetric {
    fn validate_params(&self, params: &Params) -> Result<(), String> {
        decode::<ClearanceParams>(params)?.validate()
    }

    fn evaluate(&self, traj: &Trajectory, sc: &Scenario, params: &Params) -> Result<f64, MetricError> {
        let p: ClearanceParams = decode(params).map_err(|message| MetricError::InvalidParams {
            metric: CLEARANCE.to_owned(),
            message,
        })?;
        clearance_violation(traj, sc, &p)
    }
}

struct LaneMetric;

impl Metric for LaneMetric {
    fn validate_params(&self, params: &Params) -> Result<(), String> {
        expect_no_params(params)
    }

    fn evaluate(&self, traj: &Trajectory, sc: &Scenario, _: &Params) -> Result<f64, MetricError> {
        lane_violation(traj, sc)
    }
}

struct GoalMetric;

impl Metric for GoalMetric {
    fn validate_params(&self, params: &Params) -> Result<(), String> {
        expect_no_params(params)
    }

    fn evaluate(&self, traj: &Trajectory, sc: &Scenario, _: &Params) -> Result<f64, MetricError> {
        time_to_goal_violation(traj, sc)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("metric `{0}` is already registered")]
    DuplicateName(String),
    #[error("metric name `{0}` is reserved")]
    Reserved(String),
}

/// Named metrics available to rule bindings. The built-ins are always
/// present.
#[derive(Clone)]
pub struct MetricRegistry {
    metrics: BTreeMap<String, Arc<dyn Metric>>,
}

impl Default for MetricRegistry {
    fn default() -> Self {
        let mut metrics: BTreeMap<String, Arc<dyn Metric>> = BTreeMap::new();
        metrics.insert(CLEARANCE.to_owned(), Arc::new(ClearanceMetric));
        metrics.insert(STAY_IN_LANE.to_owned(), Arc::new(LaneMetric));
        metrics.insert(TIME_TO_GOAL.to_owned(), Arc::new(GoalMetric));
        MetricRegistry { metrics }
    }
}

impl std::fmt::Debug for MetricRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.metrics.keys()).finish()
    }
}

impl MetricRegistry {
    pub fn register(
        &mut self,
        name: impl Into<String>,
        metric: impl Metric + 'static,
    ) -> Result<(), RegistryError> {
        let name = name.into();
        if name == AGGREGATE_METRIC {
            return Err(RegistryError::Reserved(name));
        }
        if self.metrics.contains_key(&name) {
            return Err(RegistryError::DuplicateName(name));
        }
        self.metrics.insert(name, Arc::new(metric));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.metrics.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        name == AGGREGATE_METRIC || self.metrics.contains_key(name)
    }

    /// Checks that a binding names a known metric with acceptable parameters,
    /// descending into aggregates.
    pub fn validate_binding(&self, binding: &MetricBinding) -> Result<(), MetricError> {
        if binding.name == AGGREGATE_METRIC {
            let spec = AggregateSpec::from_binding(binding).map_err(|message| {
                MetricError::InvalidParams {
                    metric: AGGREGATE_METRIC.to_owned(),
                    message,
                }
            })?;
            return spec
                .members
                .iter()
                .try_for_each(|m| self.validate_binding(&m.metric));
        }
        let metric = self
            .metrics
            .get(&binding.name)
            .ok_or_else(|| MetricError::UnknownMetric(binding.name.clone()))?;
        metric
            .validate_params(&binding.params)
            .map_err(|message| MetricError::InvalidParams {
                metric: binding.name.clone(),
                message,
            })
    }

    pub fn evaluate_binding(
        &self,
        binding: &MetricBinding,
        traj: &Trajectory,
        scenario: &Scenario,
    ) -> Result<f64, MetricError> {
        let value = if binding.name == AGGREGATE_METRIC {
            let spec = AggregateSpec::from_binding(binding).map_err(|message| {
                MetricError::InvalidParams {
                    metric: AGGREGATE_METRIC.to_owned(),
                    message,
                }
            })?;
            let scores = spec
                .members
                .iter()
                .map(|m| self.evaluate_binding(&m.metric, traj, scenario))
                .collect::<Result<Vec<_>, _>>()?;
            spec.combiner.apply(&scores)
        } else {
            let metric = self
                .metrics
                .get(&binding.name)
                .ok_or_else(|| MetricError::UnknownMetric(binding.name.clone()))?;
            metric.evaluate(traj, scenario, &binding.params)?
        };
        if !value.is_finite() || value < 0.0 {
            return Err(MetricError::InvalidScore {
                metric: binding.name.clone(),
                value,
            });
        }
        Ok(value)
    }
}

/// Scores `traj` in `scenario` against every rule of `rb`.
///
/// The result depends only on the arguments: rules are evaluated from the
/// observed states alone.
pub fn evaluate_profile(
    rb: &Rulebook,
    traj: &Trajectory,
    scenario: &Scenario,
    registry: &MetricRegistry,
) -> Result<ViolationProfile, EvaluationError> {
    scenario.validate()?;
    traj.validate()?;
    let max = scenario.horizon_steps + 1;
    if traj.states.len() > max {
        return Err(EvaluationError::ExceedsHorizon {
            states: traj.states.len(),
            max,
        });
    }
    if let Some(dt) = traj.dt() {
        if (dt - scenario.dt).abs() > DT_TOL {
            return Err(EvaluationError::DtMismatch {
                trajectory: dt,
                scenario: scenario.dt,
            });
        }
    }
    let mut profile = ViolationProfile::new(traj.id.clone());
    for rule in rb.rules() {
        let score = registry
            .evaluate_binding(&rule.metric, traj, scenario)
            .map_err(|source| EvaluationError::Rule {
                rule: rule.id.clone(),
                source,
            })?;
        profile.scores.insert(rule.id.clone(), score);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Polygon};
    use crate::model::{Combiner, EgoDims, EgoState, Goal, Rule};
    use serde_json::json;

    struct Constant;

    impl Metric for Constant {
        fn validate_params(&self, params: &Params) -> Result<(), String> {
            match params.get("value").and_then(Value::as_f64) {
                Some(_) => Ok(()),
                None => Err("`value` required".into()),
            }
        }

        fn evaluate(&self, _: &Trajectory, _: &Scenario, params: &Params) -> Result<f64, MetricError> {
            Ok(params["value"].as_f64().unwrap())
        }
    }

    fn registry() -> MetricRegistry {
        let mut r = MetricRegistry::default();
        r.register("constant", Constant).unwrap();
        r
    }

    fn constant(v: f64) -> MetricBinding {
        MetricBinding::with_params("constant", json!({ "value": v }))
    }

    fn scenario() -> Scenario {
        Scenario {
            id: "s".into(),
            dt: 0.5,
            horizon_steps: 4,
            ego: EgoDims { length: 4.0, width: 2.0 },
            lanes: vec![Polygon::rectangle(-5.0, -5.0, 5.0, 50.0).unwrap()],
            obstacles: vec![],
            goal: Goal { center: Point::new(0.0, 40.0), radius: 2.0 },
        }
    }

    fn traj(n: usize, dt: f64) -> Trajectory {
        let states = (0..n)
            .map(|i| EgoState { t: dt * i as f64, x: 0.0, y: i as f64, heading: 0.0, speed: 1.0 })
            .collect();
        Trajectory::new("t", states).unwrap()
    }

    #[test]
    fn builtins_registered() {
        let r = MetricRegistry::default();
        let names: Vec<&str> = r.names().collect();
        assert_eq!(names, vec![CLEARANCE, STAY_IN_LANE, TIME_TO_GOAL]);
        assert!(r.contains(AGGREGATE_METRIC));
    }

    #[test]
    fn duplicate_and_reserved_names() {
        let mut r = MetricRegistry::default();
        assert_eq!(
            r.register(CLEARANCE, Constant).unwrap_err(),
            RegistryError::DuplicateName(CLEARANCE.into())
        );
        assert_eq!(
            r.register(AGGREGATE_METRIC, Constant).unwrap_err(),
            RegistryError::Reserved(AGGREGATE_METRIC.into())
        );
    }

    #[test]
    fn binding_validation() {
        let r = MetricRegistry::default();
        assert!(r.validate_binding(&MetricBinding::new(STAY_IN_LANE)).is_ok());
        assert!(matches!(
            r.validate_binding(&MetricBinding::new("speeding")),
            Err(MetricError::UnknownMetric(_))
        ));
        assert!(matches!(
            r.validate_binding(&MetricBinding::with_params(STAY_IN_LANE, json!({"x": 1}))),
            Err(MetricError::InvalidParams { .. })
        ));
        assert!(matches!(
            r.validate_binding(&MetricBinding::with_params(CLEARANCE, json!({"base_clearance": 0.5, "typo": 1}))),
            Err(MetricError::InvalidParams { .. })
        ));
        assert!(r
            .validate_binding(&MetricBinding::with_params(
                CLEARANCE,
                json!({"base_clearance": 0.5, "mode": "shortfall", "speed_gain": 0.1,
                       "category_offsets": {"pedestrian": 1.0}})
            ))
            .is_ok());
    }

    #[test]
    fn aggregated_rule_sums_member_scores() {
        let rb = Rulebook::build(
            vec![
                Rule::new("A", "a", constant(0.2)),
                Rule::new("B", "b", constant(0.3)),
            ],
            vec![],
            vec![vec!["A".into(), "B".into()]],
        )
        .unwrap();
        let agg = rb.aggregate_rules(&["A", "B"], Combiner::Sum, "AB").unwrap();
        let p = evaluate_profile(&agg, &traj(3, 0.5), &scenario(), &registry()).unwrap();
        assert_eq!(p.scores.len(), 1);
        assert!((p.score("AB").unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_rulebook_gives_empty_profile() {
        let p = evaluate_profile(&Rulebook::empty(), &traj(2, 0.5), &scenario(), &registry()).unwrap();
        assert!(p.scores.is_empty());
        assert_eq!(p.trajectory_id, "t");
    }

    #[test]
    fn unknown_metric_carries_rule_id() {
        let rb = Rulebook::build(vec![Rule::new("X", "x", MetricBinding::new("nope"))], vec![], vec![])
            .unwrap();
        let err = evaluate_profile(&rb, &traj(2, 0.5), &scenario(), &registry()).unwrap_err();
        assert_eq!(
            err,
            EvaluationError::Rule {
                rule: "X".into(),
                source: MetricError::UnknownMetric("nope".into())
            }
        );
    }

    #[test]
    fn horizon_and_dt_checked() {
        let rb = Rulebook::empty();
        assert!(matches!(
            evaluate_profile(&rb, &traj(6, 0.5), &scenario(), &registry()),
            Err(EvaluationError::ExceedsHorizon { states: 6, max: 5 })
        ));
        assert!(matches!(
            evaluate_profile(&rb, &traj(3, 0.25), &scenario(), &registry()),
            Err(EvaluationError::DtMismatch { .. })
        ));
    }

    #[test]
    fn negative_custom_score_rejected() {
        let rb = Rulebook::build(vec![Rule::new("N", "n", constant(-1.0))], vec![], vec![]).unwrap();
        assert!(matches!(
            evaluate_profile(&rb, &traj(2, 0.5), &scenario(), &registry()),
            Err(EvaluationError::Rule { source: MetricError::InvalidScore { .. }, .. })
        ));
    }
}
