//! On-disk shapes of document bodies and their conversion to model types.

use serde::{Deserialize, Serialize};

use crate::geometry::Polygon;
use crate::model::{
    EgoDims, EgoState, Goal, MetricBinding, Obstacle, ObstacleFootprint, Rule, RuleId, Rulebook,
    Scenario, Trajectory, DEFAULT_RULEBOOK_ID,
};

fn default_rulebook_id() -> String {
    DEFAULT_RULEBOOK_ID.to_owned()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct RuleDoc {
    pub id: RuleId,
    #[serde(default)]
    pub description: String,
    pub metric: MetricBinding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptable_violation: Option<f64>,
    #[serde(default = "yes")]
    pub count_in_criticality: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct RulebookDoc {
    #[serde(default = "default_rulebook_id")]
    pub id: String,
    #[serde(default)]
    pub rules: Vec<RuleDoc>,
    #[serde(default)]
    pub strict_edges: Vec<(RuleId, RuleId)>,
    #[serde(default)]
    pub equivalences: Vec<Vec<RuleId>>,
}

impl From<&Rulebook> for RulebookDoc {
    fn from(rb: &Rulebook) -> Self {
        RulebookDoc {
            id: rb.id().to_owned(),
            rules: rb
                .rules()
                .iter()
                .map(|r| RuleDoc {
                    id: r.id.clone(),
                    description: r.description.clone(),
                    metric: r.metric.clone(),
                    acceptable_violation: r.acceptable_violation,
                    count_in_criticality: r.count_in_criticality,
                })
                .collect(),
            strict_edges: rb.strict_edges().to_vec(),
            equivalences: rb.equivalences().to_vec(),
        }
    }
}

impl RuleDoc {
    pub fn into_rule(self) -> Rule {
        Rule {
            id: self.id,
            description: self.description,
            metric: self.metric,
            acceptable_violation: self.acceptable_violation,
            count_in_criticality: self.count_in_criticality,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ObstacleDoc {
    pub category: String,
    #[serde(rename = "static", default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Polygon>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<Polygon>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ScenarioDoc {
    pub id: String,
    pub dt: f64,
    pub horizon_steps: usize,
    pub ego: EgoDims,
    pub lanes: Vec<Polygon>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    pub goal: Goal,
}

impl From<&Scenario> for ScenarioDoc {
    fn from(s: &Scenario) -> Self {
        ScenarioDoc {
            id: s.id.clone(),
            dt: s.dt,
            horizon_steps: s.horizon_steps,
            ego: s.ego,
            lanes: s.lanes.clone(),
            obstacles: s
                .obstacles
                .iter()
                .map(|o| {
                    let (fixed, steps) = match &o.footprint {
                        ObstacleFootprint::Static(p) => (Some(p.clone()), None),
                        ObstacleFootprint::Steps(v) => (None, Some(v.clone())),
                    };
                    ObstacleDoc {
                        category: o.category.clone(),
                        fixed,
                        steps,
                    }
                })
                .collect(),
            goal: s.goal,
        }
    }
}

impl ScenarioDoc {
    /// Builds the scenario, or names the obstacle whose footprint is not
    /// given exactly once.
    pub fn into_scenario(self) -> Result<Scenario, usize> {
        let obstacles = self
            .obstacles
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                let footprint = match (o.fixed, o.steps) {
                    (Some(p), None) => ObstacleFootprint::Static(p),
                    (None, Some(v)) => ObstacleFootprint::Steps(v),
                    _ => return Err(i),
                };
                Ok(Obstacle {
                    category: o.category,
                    footprint,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Scenario {
            id: self.id,
            dt: self.dt,
            horizon_steps: self.horizon_steps,
            ego: self.ego,
            lanes: self.lanes,
            obstacles,
            goal: self.goal,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct TrajectoryDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub states: Vec<EgoState>,
}

impl From<&Trajectory> for TrajectoryDoc {
    fn from(t: &Trajectory) -> Self {
        TrajectoryDoc {
            id: t.id.clone(),
            dt: t.declared_dt,
            states: t.states.clone(),
        }
    }
}

impl TrajectoryDoc {
    pub fn into_trajectory(self) -> Trajectory {
        Trajectory {
            id: self.id,
            declared_dt: self.dt,
            states: self.states,
        }
    }
}
