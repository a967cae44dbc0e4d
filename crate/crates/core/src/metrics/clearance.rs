use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::geometry::{footprint, min_distance, Point};
use crate::model::{Scenario, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClearanceMode {
    /// Share of steps with at least one obstacle closer than required.
    #[default]
    Fraction,
    /// Mean over steps of the worst relative shortfall below the required
    /// clearance.
    Shortfall,
}

/// Parameters of the `clearance` metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClearanceParams {
    /// Required clearance for any object, meters.
    pub base_clearance: f64,
    /// Extra clearance per obstacle category, meters.
    #[serde(default)]
    pub category_offsets: BTreeMap<String, f64>,
    /// Extra clearance per m/s of closing speed, seconds.
    #[serde(default)]
    pub speed_gain: f64,
    #[serde(default)]
    pub mode: ClearanceMode,
}

impl ClearanceParams {
    pub fn constant(base_clearance: f64) -> Self {
        ClearanceParams {
            base_clearance,
            category_offsets: BTreeMap::new(),
            speed_gain: 0.0,
            mode: ClearanceMode::Fraction,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.base_clearance.is_finite() || self.base_clearance <= 0.0 {
            return Err("base_clearance must be > 0".to_owned());
        }
        if !self.speed_gain.is_finite() || self.speed_gain < 0.0 {
            return Err("speed_gain must be >= 0".to_owned());
        }
        if let Some((cat, _)) = self
            .category_offsets
            .iter()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(format!("category offset for `{cat}` must be >= 0"));
        }
        Ok(())
    }
}

/// Clearance demanded from an object of `category` approaching at
/// `closing_speed` (negative when receding).
pub fn required_clearance(p: &ClearanceParams, category: &str, closing_speed: f64) -> f64 {
    let offset = p.category_offsets.get(category).copied().unwrap_or(0.0);
    p.base_clearance + offset + p.speed_gain * closing_speed.max(0.0)
}

/// Rate at which the distance between two moving points shrinks.
pub fn closing_speed(ego_pos: Point, ego_vel: Point, obj_pos: Point, obj_vel: Point) -> f64 {
    let rel_pos = obj_pos.sub(ego_pos);
    let rel_vel = obj_vel.sub(ego_vel);
    let dist = rel_pos.norm();
    if dist == 0.0 {
        return rel_vel.norm();
    }
    -rel_pos.dot(rel_vel) / dist
}

pub fn clearance_violation(
    traj: &Trajectory,
    scenario: &Scenario,
    p: &ClearanceParams,
) -> Result<f64, MetricError> {
    if traj.states.is_empty() {
        return Err(MetricError::EmptyTrajectory);
    }
    let mut total = 0.0;
    for (k, s) in traj.states.iter().enumerate() {
        let ego = footprint(s, &scenario.ego);
        let ego_pos = Point::new(s.x, s.y);
        let (sin, cos) = s.heading.sin_cos();
        let ego_vel = Point::new(s.speed * cos, s.speed * sin);
        let mut violated = false;
        let mut worst = 0.0f64;
        for ob in &scenario.obstacles {
            let shape = ob.at_step(k);
            let d = min_distance(&ego, shape);
            let closing = closing_speed(ego_pos, ego_vel, shape.centroid(), ob.velocity_at(k, scenario.dt));
            let req = required_clearance(p, &ob.category, closing);
            if d < req {
                violated = true;
                worst = worst.max((req - d) / req);
            }
        }
        total += match p.mode {
            ClearanceMode::Fraction => f64::from(u8::from(violated)),
            ClearanceMode::Shortfall => worst,
        };
    }
    Ok(total / traj.states.len() as f64)
}
