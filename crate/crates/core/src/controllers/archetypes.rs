//! Constructed reference behaviours used to sanity-check the analysis.

use super::Controller;
use crate::world::THETA_MAX;

/// Replays a fixed schedule and never looks at its sensors: `first_leg`
/// steps right, then alternating legs of `leg` steps left and right.
#[derive(Debug, Clone)]
pub struct ZigzagController {
    first_leg: usize,
    leg: usize,
    t: usize,
}

impl ZigzagController {
    pub fn new(first_leg: usize, leg: usize) -> Self {
        assert!(leg > 0, "zigzag legs must be non-empty");
        Self {
            first_leg,
            leg,
            t: 0,
        }
    }

    /// Schedule that turns exactly at the thresholds of an erf world started
    /// from the centre cell.
    pub fn tuned_for(env: &crate::world::Environment) -> Self {
        let q = env.quality();
        let high = q
            .iter()
            .position(|&v| v >= THETA_MAX)
            .unwrap_or(q.len() - 1);
        let low = q.iter().rposition(|&v| v <= -THETA_MAX).unwrap_or(0);
        let start = env.centre();
        Self::new(high.saturating_sub(start), high - low)
    }
}

impl Controller for ZigzagController {
    fn reset(&mut self) {
        self.t = 0;
    }

    fn act(&mut self, _left: f64, _right: f64) -> f64 {
        let t = self.t;
        self.t += 1;
        let rightward = if t < self.first_leg {
            true
        } else {
            ((t - self.first_leg) / self.leg) % 2 == 1
        };
        if rightward {
            -1.0
        } else {
            1.0
        }
    }
}

/// Blind drift: two steps right, one step left, forever.
#[derive(Debug, Clone, Default)]
pub struct DriftController {
    t: usize,
}

impl Controller for DriftController {
    fn reset(&mut self) {
        self.t = 0;
    }

    fn act(&mut self, _left: f64, _right: f64) -> f64 {
        let t = self.t;
        self.t += 1;
        if t % 3 == 2 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Climbs the gradient and stops on the last cell below the upper
/// threshold. Needs [`MoveMode::WithRest`](super::MoveMode) to actually stay.
#[derive(Debug, Clone)]
pub struct ParkingController {
    theta: f64,
}

impl Default for ParkingController {
    fn default() -> Self {
        Self { theta: THETA_MAX }
    }
}

impl Controller for ParkingController {
    fn reset(&mut self) {}

    fn act(&mut self, left: f64, right: f64) -> f64 {
        if left.max(right) >= self.theta {
            0.0
        } else if left > right {
            1.0
        } else {
            -1.0
        }
    }
}
