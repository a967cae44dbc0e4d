//! Two near-identical parked-car scenarios that differ only in lane width,
//! with three candidate trajectories each: stop behind the car (a), pass
//! straight and close (b), or swing left to pass with room (c).
//!
//! All dimensions are constructed. In the wide lane a pass with full
//! clearance fits inside the lane; in the narrow lane it does not, so (c)
//! has to leave the lane.

use std::f64::consts::FRAC_PI_2;

use serde_json::json;

use crate::geometry::{Point, Polygon};
use crate::model::{
    EgoDims, EgoState, Goal, MetricBinding, Obstacle, Rule, Rulebook, Scenario, Trajectory,
};

/// Clearance demanded from the parked car, meters.
pub const REQUIRED_CLEARANCE: f64 = 0.5;

const LANE_LENGTH: f64 = 60.0;
const EGO_LENGTH: f64 = 4.5;
const EGO_WIDTH: f64 = 1.8;
const CAR_CENTER_Y: f64 = 30.0;
const GOAL_Y: f64 = 45.0;
const GOAL_RADIUS: f64 = 2.0;
const DT: f64 = 0.5;
const HORIZON: usize = 40;
const START_Y: f64 = 3.0;
const CRUISE: f64 = 2.5;
/// Trajectory (a) brakes at this time and decelerates until it stops.
const BRAKE_AT: f64 = 7.6;
const DECEL: f64 = 1.25;
/// Trajectory (c) shifts laterally between these ordinates.
const SHIFT_FROM_Y: f64 = 10.0;
const SHIFT_TO_Y: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureScenario {
    /// 5.4 m lane.
    Wide,
    /// 3.8 m lane.
    Narrow,
}

impl FixtureScenario {
    pub fn number(self) -> u8 {
        match self {
            FixtureScenario::Wide => 1,
            FixtureScenario::Narrow => 2,
        }
    }

    fn lane_width(self) -> f64 {
        match self {
            FixtureScenario::Wide => 5.4,
            FixtureScenario::Narrow => 3.8,
        }
    }

    /// Lateral position of (a) and (b): 0.2 m / 0.1 m from the car.
    fn straight_x(self) -> f64 {
        match self {
            FixtureScenario::Wide => 2.5,
            FixtureScenario::Narrow => 1.0,
        }
    }

    /// Lateral position of (c) alongside the car.
    fn pass_x(self) -> f64 {
        match self {
            FixtureScenario::Wide => 1.6,
            FixtureScenario::Narrow => 0.3,
        }
    }
}

impl TryFrom<u8> for FixtureScenario {
    type Error = u8;

    fn try_from(n: u8) -> Result<Self, u8> {
        match n {
            1 => Ok(FixtureScenario::Wide),
            2 => Ok(FixtureScenario::Narrow),
            other => Err(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub scenario: Scenario,
    /// Trajectories `a`, `b`, `c` in that order.
    pub trajectories: Vec<Trajectory>,
    pub rulebook: Rulebook,
}

/// Clearance over lane keeping over getting to the goal. The first two
/// tolerate no violation; the goal rule is violated by every trajectory of
/// positive duration and is left out of criticality counts.
pub fn parked_car_rulebook() -> Rulebook {
    let rules = vec![
        Rule::new(
            "R1",
            "Maintain clearance from other objects",
            MetricBinding::with_params("clearance", json!({ "base_clearance": REQUIRED_CLEARANCE })),
        )
        .with_threshold(0.0),
        Rule::new("R2", "Stay in lane", MetricBinding::new("stay_in_lane")).with_threshold(0.0),
        Rule::new(
            "R3",
            "Reach the goal as soon as possible",
            MetricBinding::new("time_to_goal"),
        )
        .excluded_from_criticality(),
    ];
    let edges = vec![("R1".into(), "R2".into()), ("R2".into(), "R3".into())];
    Rulebook::build_with_id("parked-car", rules, edges, vec![]).expect("chain of three rules")
}

pub fn fixture_scenario(which: FixtureScenario) -> Fixture {
    let w = which.lane_width();
    let rect = |x0, y0, x1, y1| Polygon::rectangle(x0, y0, x1, y1).expect("positive box");
    let scenario = Scenario {
        id: match which {
            FixtureScenario::Wide => "parked-car-wide".to_owned(),
            FixtureScenario::Narrow => "parked-car-narrow".to_owned(),
        },
        dt: DT,
        horizon_steps: HORIZON,
        ego: EgoDims {
            length: EGO_LENGTH,
            width: EGO_WIDTH,
        },
        lanes: vec![rect(0.0, 0.0, w, LANE_LENGTH)],
        obstacles: vec![Obstacle::parked(
            "car",
            rect(
                w - EGO_WIDTH,
                CAR_CENTER_Y - EGO_LENGTH / 2.0,
                w,
                CAR_CENTER_Y + EGO_LENGTH / 2.0,
            ),
        )],
        goal: Goal {
            center: Point::new(w / 2.0, GOAL_Y),
            radius: GOAL_RADIUS,
        },
    };
    let trajectories = vec![
        stopping(which.straight_x()),
        straight(which.straight_x()),
        swerving(which.straight_x(), which.pass_x()),
    ];
    Fixture {
        scenario,
        trajectories,
        rulebook: parked_car_rulebook(),
    }
}

fn times() -> impl Iterator<Item = f64> {
    (0..=HORIZON).map(|i| i as f64 * DT)
}

fn trajectory(id: &str, states: Vec<EgoState>) -> Trajectory {
    Trajectory::with_declared_dt(id, DT, states).expect("uniform fixture sampling")
}

/// Cruise, brake at a constant rate, then stand still.
fn stopping(x: f64) -> Trajectory {
    let brake_y = START_Y + CRUISE * BRAKE_AT;
    let stop_after = CRUISE / DECEL;
    let states = times()
        .map(|t| {
            let (y, speed) = if t <= BRAKE_AT {
                (START_Y + CRUISE * t, CRUISE)
            } else {
                let tau = (t - BRAKE_AT).min(stop_after);
                (brake_y + CRUISE * tau - 0.5 * DECEL * tau * tau, CRUISE - DECEL * tau)
            };
            EgoState { t, x, y, heading: FRAC_PI_2, speed }
        })
        .collect();
    trajectory("a", states)
}

fn straight(x: f64) -> Trajectory {
    let states = times()
        .map(|t| EgoState {
            t,
            x,
            y: START_Y + CRUISE * t,
            heading: FRAC_PI_2,
            speed: CRUISE,
        })
        .collect();
    trajectory("b", states)
}

/// Constant forward rate with a smoothstep lateral shift from `x0` to `x1`.
fn swerving(x0: f64, x1: f64) -> Trajectory {
    let span = SHIFT_TO_Y - SHIFT_FROM_Y;
    let states = times()
        .map(|t| {
            let y = START_Y + CRUISE * t;
            let u = ((y - SHIFT_FROM_Y) / span).clamp(0.0, 1.0);
            let x = x0 + (x1 - x0) * u * u * (3.0 - 2.0 * u);
            let slope = (x1 - x0) * 6.0 * u * (1.0 - u) / span;
            EgoState {
                t,
                x,
                y,
                heading: f64::atan2(1.0, slope),
                speed: CRUISE * (1.0 + slope * slope).sqrt(),
            }
        })
        .collect();
    trajectory("c", states)
}

/// Range of lateral positions at which a straight-heading ego beside the
/// first obstacle stays inside the first lane and keeps `clearance` from
/// the obstacle's left side, or `None` when no such position exists.
pub fn in_lane_pass_interval(scenario: &Scenario, clearance: f64) -> Option<(f64, f64)> {
    let xs = |p: &Polygon| {
        let (lo, hi) = p
            .vertices()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.x), hi.max(v.x)));
        (lo, hi)
    };
    let (lane_lo, lane_hi) = xs(scenario.lanes.first()?);
    let (car_lo, _) = xs(scenario.obstacles.first()?.at_step(0));
    let half = scenario.ego.width / 2.0;
    let lo = lane_lo + half;
    let hi = (lane_hi - half).min(car_lo - clearance - half);
    (lo <= hi).then_some((lo, hi))
}
