use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Polygon};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoDims {
    pub length: f64,
    pub width: f64,
}

/// Goal region: a disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub center: Point,
    pub radius: f64,
}

/// Where an obstacle is over the scenario horizon.
#[derive(Debug, Clone, PartialEq)]
pub enum ObstacleFootprint {
    Static(Polygon),
    /// One polygon per time step, `horizon_steps + 1` entries.
    Steps(Vec<Polygon>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub category: String,
    pub footprint: ObstacleFootprint,
}

impl Obstacle {
    pub fn parked(category: impl Into<String>, shape: Polygon) -> Self {
        Obstacle {
            category: category.into(),
            footprint: ObstacleFootprint::Static(shape),
        }
    }

    /// Footprint at step `k`; the last entry is held past the end.
    pub fn at_step(&self, k: usize) -> &Polygon {
        match &self.footprint {
            ObstacleFootprint::Static(p) => p,
            ObstacleFootprint::Steps(v) => &v[k.min(v.len() - 1)],
        }
    }

    /// Centroid velocity at step `k` from finite differences of the per-step
    /// footprints (forward, backward at the last step).
    pub fn velocity_at(&self, k: usize, dt: f64) -> Point {
        match &self.footprint {
            ObstacleFootprint::Static(_) => Point::new(0.0, 0.0),
            ObstacleFootprint::Steps(v) if v.len() < 2 => Point::new(0.0, 0.0),
            ObstacleFootprint::Steps(v) => {
                let k = k.min(v.len() - 1);
                let (a, b) = if k + 1 < v.len() { (k, k + 1) } else { (k - 1, k) };
                v[b].centroid().sub(v[a].centroid()).scale(1.0 / dt)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("dt must be finite and positive")]
    InvalidDt,
    #[error("horizon_steps must be positive")]
    InvalidHorizon,
    #[error("ego dimensions must be positive")]
    InvalidEgoDims,
    #[error("goal radius must be finite and positive")]
    InvalidGoal,
    #[error("obstacle {index} has {found} footprints, expected {expected}")]
    FootprintCount {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("obstacle {0} has an empty category")]
    EmptyCategory(usize),
}

/// A driving situation in which trajectories are scored.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub dt: f64,
    pub horizon_steps: usize,
    pub ego: EgoDims,
    pub lanes: Vec<Polygon>,
    pub obstacles: Vec<Obstacle>,
    pub goal: Goal,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(ScenarioError::InvalidDt);
        }
        if self.horizon_steps == 0 {
            return Err(ScenarioError::InvalidHorizon);
        }
        let dims_ok = |v: f64| v.is_finite() && v > 0.0;
        if !dims_ok(self.ego.length) || !dims_ok(self.ego.width) {
            return Err(ScenarioError::InvalidEgoDims);
        }
        let g = &self.goal;
        if !dims_ok(g.radius) || !g.center.x.is_finite() || !g.center.y.is_finite() {
            return Err(ScenarioError::InvalidGoal);
        }
        for (index, ob) in self.obstacles.iter().enumerate() {
            if ob.category.is_empty() {
                return Err(ScenarioError::EmptyCategory(index));
            }
            if let ObstacleFootprint::Steps(v) = &ob.footprint {
                if v.len() != self.horizon_steps + 1 {
                    return Err(ScenarioError::FootprintCount {
                        index,
                        expected: self.horizon_steps + 1,
                        found: v.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x: f64) -> Polygon {
        Polygon::rectangle(x, 0.0, x + 1.0, 1.0).unwrap()
    }

    fn scenario() -> Scenario {
        Scenario {
            id: "s".into(),
            dt: 0.5,
            horizon_steps: 2,
            ego: EgoDims {
                length: 4.0,
                width: 2.0,
            },
            lanes: vec![Polygon::rectangle(0.0, 0.0, 4.0, 50.0).unwrap()],
            obstacles: vec![],
            goal: Goal {
                center: Point::new(2.0, 40.0),
                radius: 2.0,
            },
        }
    }

    #[test]
    fn valid_scenario() {
        assert_eq!(scenario().validate(), Ok(()));
    }

    #[test]
    fn footprint_list_length_checked() {
        let mut s = scenario();
        s.obstacles.push(Obstacle {
            category: "car".into(),
            footprint: ObstacleFootprint::Steps(vec![sq(0.0), sq(1.0)]),
        });
        assert_eq!(
            s.validate(),
            Err(ScenarioError::FootprintCount {
                index: 0,
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn bad_goal_and_dims() {
        let mut s = scenario();
        s.goal.radius = 0.0;
        assert_eq!(s.validate(), Err(ScenarioError::InvalidGoal));
        let mut s = scenario();
        s.ego.width = -1.0;
        assert_eq!(s.validate(), Err(ScenarioError::InvalidEgoDims));
        let mut s = scenario();
        s.horizon_steps = 0;
        assert_eq!(s.validate(), Err(ScenarioError::InvalidHorizon));
    }

    #[test]
    fn moving_obstacle_velocity() {
        let ob = Obstacle {
            category: "car".into(),
            footprint: ObstacleFootprint::Steps(vec![sq(0.0), sq(1.0), sq(2.0)]),
        };
        let v = ob.velocity_at(0, 0.5);
        assert!((v.x - 2.0).abs() < 1e-12 && v.y.abs() < 1e-12);
        let v = ob.velocity_at(2, 0.5);
        assert!((v.x - 2.0).abs() < 1e-12);
        assert_eq!(ob.at_step(7), &sq(2.0));
    }
}
