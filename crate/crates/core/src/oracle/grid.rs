//! Exhaustive small trajectory sets on a lattice.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::geometry::{Point, Polygon};
use crate::model::{EgoDims, EgoState, Goal, Obstacle, Scenario, Trajectory};

/// Deepest enumeration allowed: 4^6 = 4096 trajectories.
pub const MAX_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Hold,
    Forward,
    ForwardLeft,
    ForwardRight,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Hold, Action::Forward, Action::ForwardLeft, Action::ForwardRight];

    pub fn letter(self) -> char {
        match self {
            Action::Hold => 'H',
            Action::Forward => 'F',
            Action::ForwardLeft => 'L',
            Action::ForwardRight => 'R',
        }
    }

    /// Displacement in lattice steps as (forward, left).
    fn offset(self) -> (f64, f64) {
        match self {
            Action::Hold => (0.0, 0.0),
            Action::Forward => (1.0, 0.0),
            Action::ForwardLeft => (1.0, 1.0),
            Action::ForwardRight => (1.0, -1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("depth must be at least 1")]
    InvalidDepth,
    #[error("depth {0} exceeds the maximum of {MAX_DEPTH}")]
    DepthTooLarge(usize),
    #[error("lattice step and dt must be finite and positive")]
    InvalidSpacing,
}

/// A lattice of moves. The ego keeps its starting heading; moves are taken
/// in that heading's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridWorld {
    /// Lattice spacing, meters.
    pub step: f64,
    pub dt: f64,
    pub depth: usize,
}

impl GridWorld {
    pub fn new(step: f64, dt: f64, depth: usize) -> Result<Self, GridError> {
        let g = GridWorld { step, dt, depth };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), GridError> {
        if self.depth == 0 {
            return Err(GridError::InvalidDepth);
        }
        if self.depth > MAX_DEPTH {
            return Err(GridError::DepthTooLarge(self.depth));
        }
        if !(self.step.is_finite() && self.step > 0.0 && self.dt.is_finite() && self.dt > 0.0) {
            return Err(GridError::InvalidSpacing);
        }
        Ok(())
    }

    /// A small scenario matched to this lattice, for a start at the origin
    /// heading along +y. `variant` selects lane half-width (4 choices),
    /// obstacle column (3), obstacle row (3) and goal column (3); it wraps
    /// after 108.
    pub fn scenario(&self, variant: u64) -> Scenario {
        let s = self.step;
        let reach = self.depth as f64 * s;
        let half_width = [0.9, 1.4, 1.9, 2.4][(variant % 4) as usize] * s;
        let ox = [-1.0, 0.0, 1.0][(variant / 4 % 3) as usize] * s;
        let oy = (1.5 + (variant / 12 % 3) as f64) * s;
        let gx = [-1.0, 0.0, 1.0][(variant / 36 % 3) as usize] * s;
        let rect = |x0: f64, y0: f64, x1: f64, y1: f64| Polygon::rectangle(x0, y0, x1, y1).expect("positive box");
        let box_half = 0.4 * s;
        Scenario {
            id: format!("grid-{variant}"),
            dt: self.dt,
            horizon_steps: self.depth,
            ego: EgoDims {
                length: s,
                width: 0.6 * s,
            },
            lanes: vec![rect(-half_width, -2.0 * s, half_width, reach + 2.0 * s)],
            obstacles: vec![Obstacle::parked(
                "box",
                rect(ox - box_half, oy - box_half, ox + box_half, oy + box_half),
            )],
            goal: Goal {
                center: Point::new(gx, reach),
                radius: 0.5 * s,
            },
        }
    }
}

/// The origin, heading along +y, at rest.
pub fn grid_origin() -> EgoState {
    EgoState {
        t: 0.0,
        x: 0.0,
        y: 0.0,
        heading: FRAC_PI_2,
        speed: 0.0,
    }
}

/// Every action sequence of length `grid.depth` from `start`, in
/// lexicographic action order. Trajectory ids spell the actions, e.g. `FLH`.
pub fn enumerate_trajectories(grid: &GridWorld, start: &EgoState) -> Result<Vec<Trajectory>, GridError> {
    grid.validate()?;
    let (sin, cos) = start.heading.sin_cos();
    let forward = Point::new(cos, sin).scale(grid.step);
    let left = Point::new(-sin, cos).scale(grid.step);
    let count = Action::ALL.len().pow(grid.depth as u32);
    let mut out = Vec::with_capacity(count);
    for code in 0..count {
        let mut actions = Vec::with_capacity(grid.depth);
        let mut rest = code;
        for _ in 0..grid.depth {
            actions.push(Action::ALL[rest % 4]);
            rest /= 4;
        }
        actions.reverse();
        let mut states = Vec::with_capacity(grid.depth + 1);
        states.push(*start);
        let mut pos = Point::new(start.x, start.y);
        for (i, a) in actions.iter().enumerate() {
            let (f, l) = a.offset();
            let d = forward.scale(f).add(left.scale(l));
            pos = pos.add(d);
            states.push(EgoState {
                t: start.t + (i + 1) as f64 * grid.dt,
                x: pos.x,
                y: pos.y,
                heading: start.heading,
                speed: d.norm() / grid.dt,
            });
        }
        out.push(Trajectory {
            id: actions.iter().map(|a| a.letter()).collect(),
            declared_dt: Some(grid.dt),
            states,
        });
    }
    Ok(out)
}
