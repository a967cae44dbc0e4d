//! Independent reference implementations and the worked parked-car
//! scenarios. Nothing here shares logic with the production comparator; it
//! exists to check it.

mod fixtures;
mod grid;
mod naive;

pub use fixtures::{
    fixture_scenario, in_lane_pass_interval, parked_car_rulebook, Fixture, FixtureScenario,
    REQUIRED_CLEARANCE,
};
pub use grid::{enumerate_trajectories, grid_origin, Action, GridError, GridWorld, MAX_DEPTH};
pub use naive::{naive_dominance, naive_rank};
