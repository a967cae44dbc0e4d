use super::MetricError;
use crate::geometry::{contained, footprint};
use crate::model::{Scenario, Trajectory};

/// Share of steps whose ego footprint leaves the union of lane polygons.
/// Any part of the footprint outside counts as out of lane.
pub fn lane_violation(traj: &Trajectory, scenario: &Scenario) -> Result<f64, MetricError> {
    if traj.states.is_empty() {
        return Err(MetricError::EmptyTrajectory);
    }
    if scenario.lanes.is_empty() {
        return Err(MetricError::NoLanesDefined);
    }
    let outside = traj
        .states
        .iter()
        .filter(|s| !contained(&footprint(s, &scenario.ego), &scenario.lanes))
        .count();
    Ok(outside as f64 / traj.states.len() as f64)
}
