use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the spacing of consecutive timestamps, seconds.
pub const DT_TOL: f64 = 1e-9;

/// One sampled ego pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("trajectory has no states")]
    Empty,
    #[error("state {0} has a non-finite field")]
    NonFinite(usize),
    #[error("state {0} has negative speed")]
    NegativeSpeed(usize),
    #[error("timestamp of state {0} is not increasing")]
    NonMonotoneTime(usize),
    #[error("state {index}: time step {found} differs from {expected}")]
    NonUniformStep {
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("declared dt must be finite and positive")]
    InvalidDt,
}

/// A uniformly sampled ego trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    /// Sampling period stated by the producer of the log, if any. When
    /// present, every step must match it.
    pub declared_dt: Option<f64>,
    pub states: Vec<EgoState>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, states: Vec<EgoState>) -> Result<Self, TrajectoryError> {
        let traj = Trajectory {
            id: id.into(),
            declared_dt: None,
            states,
        };
        traj.validate()?;
        Ok(traj)
    }

    pub fn with_declared_dt(
        id: impl Into<String>,
        dt: f64,
        states: Vec<EgoState>,
    ) -> Result<Self, TrajectoryError> {
        let traj = Trajectory {
            id: id.into(),
            declared_dt: Some(dt),
            states,
        };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if self.states.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        if let Some(dt) = self.declared_dt {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(TrajectoryError::InvalidDt);
            }
        }
        for (i, s) in self.states.iter().enumerate() {
            if ![s.t, s.x, s.y, s.heading, s.speed].iter().all(|v| v.is_finite()) {
                return Err(TrajectoryError::NonFinite(i));
            }
            if s.speed < 0.0 {
                return Err(TrajectoryError::NegativeSpeed(i));
            }
        }
        let expected = match (self.declared_dt, self.states.len()) {
            (Some(dt), _) => dt,
            (None, n) if n >= 2 => self.states[1].t - self.states[0].t,
            _ => return Ok(()),
        };
        for (i, w) in self.states.windows(2).enumerate() {
            let step = w[1].t - w[0].t;
            if step <= 0.0 {
                return Err(TrajectoryError::NonMonotoneTime(i + 1));
            }
            if (step - expected).abs() > DT_TOL {
                return Err(TrajectoryError::NonUniformStep {
                    index: i + 1,
                    expected,
                    found: step,
                });
            }
        }
        Ok(())
    }

    /// Sampling period: the declared one, else the spacing of the first two
    /// states. `None` for an undeclared single-state trajectory.
    pub fn dt(&self) -> Option<f64> {
        self.declared_dt.or_else(|| {
            (self.states.len() >= 2).then(|| self.states[1].t - self.states[0].t)
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}
