use super::MetricError;
use crate::geometry::Point;
use crate::model::{Scenario, Trajectory};

/// Steps needed until the ego reference point first lies in the goal disc.
///
/// A trajectory that never arrives scores `N + d_end / (d_start + d_end)`,
/// with `N` the number of states and `d` the distance to the disc boundary,
/// so every miss ranks behind every arrival and closer misses rank ahead.
pub fn time_to_goal_violation(traj: &Trajectory, scenario: &Scenario) -> Result<f64, MetricError> {
    let first = traj.states.first().ok_or(MetricError::EmptyTrajectory)?;
    let last = traj.states.last().ok_or(MetricError::EmptyTrajectory)?;
    let goal = &scenario.goal;
    let dist = |x: f64, y: f64| Point::new(x, y).dist(goal.center);

    if let Some(i) = traj
        .states
        .iter()
        .position(|s| dist(s.x, s.y) <= goal.radius)
    {
        return Ok(i as f64);
    }
    let d_start = (dist(first.x, first.y) - goal.radius).max(0.0);
    let d_end = (dist(last.x, last.y) - goal.radius).max(0.0);
    let progress = if d_start + d_end == 0.0 {
        0.0
    } else {
        d_end / (d_start + d_end)
    };
    Ok(traj.states.len() as f64 + progress)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::model::{EgoDims, EgoState, Goal};

    fn scenario(goal_y: f64) -> Scenario {
        Scenario {
            id: "g".into(),
            dt: 0.5,
            horizon_steps: 40,
            ego: EgoDims { length: 4.5, width: 1.8 },
            lanes: vec![Polygon::rectangle(-3.0, -10.0, 3.0, 80.0).unwrap()],
            obstacles: vec![],
            goal: Goal { center: Point::new(0.0, goal_y), radius: 2.0 },
        }
    }

    /// Constant 2 m/s along +y from the origin, dt 0.5: y_i = i.
    fn run(n: usize, stop_at: Option<f64>) -> Trajectory {
        let states = (0..n)
            .map(|i| {
                let y = stop_at.map_or(i as f64, |s| (i as f64).min(s));
                EgoState { t: 0.5 * i as f64, x: 0.0, y, heading: 0.0, speed: 2.0 }
            })
            .collect();
        Trajectory::new("run", states).unwrap()
    }

    #[test]
    fn starting_inside_goal_scores_zero() {
        assert_eq!(time_to_goal_violation(&run(5, None), &scenario(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn constant_speed_entry_at_step_thirty() {
        // Goal boundary at y = 30, reached exactly at state 30 of 41.
        assert_eq!(time_to_goal_violation(&run(41, None), &scenario(32.0)).unwrap(), 30.0);
    }

    #[test]
    fn miss_scores_above_state_count() {
        // Stops at y = 10; start 40 m from the boundary, end 30 m away.
        let s = time_to_goal_violation(&run(41, Some(10.0)), &scenario(42.0)).unwrap();
        assert!((s - (41.0 + 30.0 / 70.0)).abs() < 1e-12);
    }

    #[test]
    fn no_progress_scores_half() {
        let s = time_to_goal_violation(&run(3, Some(0.0)), &scenario(42.0)).unwrap();
        assert!((s - 3.5).abs() < 1e-12);
    }
}
