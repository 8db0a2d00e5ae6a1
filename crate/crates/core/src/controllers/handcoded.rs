use super::Controller;
use crate::world::THETA_MAX;

/// The reference reactive controller: a one-bit mode plus greedy steering.
///
/// Each step the mode is updated first from the mean of the two readings
/// (leave uphill mode above `theta`, leave downhill mode below `-theta`),
/// then the agent steers toward the higher reading in uphill mode and toward
/// the lower one in downhill mode. Ties steer right.
#[derive(Debug, Clone, PartialEq)]
pub struct HandCodedController {
    state: f64,
    theta: f64,
}

impl Default for HandCodedController {
    fn default() -> Self {
        Self::new(THETA_MAX)
    }
}

impl HandCodedController {
    pub fn new(theta: f64) -> Self {
        Self { state: 1.0, theta }
    }

    /// `+1` while climbing, `-1` while descending.
    pub fn state(&self) -> f64 {
        self.state
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl Controller for HandCodedController {
    fn reset(&mut self) {
        self.state = 1.0;
    }

    fn act(&mut self, left: f64, right: f64) -> f64 {
        if 0.5 * (left + right) * self.state > self.theta {
            self.state = -self.state;
        }
        if left * self.state > right * self.state {
            1.0
        } else {
            -1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn climbs_toward_higher_reading() {
        let mut c = HandCodedController::default();
        assert_eq!(c.act(0.2, 0.4), -1.0);
        assert_eq!(c.state(), 1.0);
        assert_eq!(c.act(0.4, 0.2), 1.0);
    }

    #[test]
    fn switches_on_high_mean() {
        let mut c = HandCodedController::default();
        // mean 0.965 > 0.95: now descending, so steer toward the lower left reading
        assert_eq!(c.act(0.96, 0.97), 1.0);
        assert_eq!(c.state(), -1.0);
    }

    #[test]
    fn descends_toward_lower_reading() {
        let mut c = HandCodedController::default();
        c.act(0.96, 0.97);
        assert_eq!(c.act(-0.3, 0.1), 1.0);
        assert_eq!(c.act(0.1, -0.3), -1.0);
        assert_eq!(c.state(), -1.0);
        // mean below -theta switches back
        assert_eq!(c.act(-0.97, -0.96), -1.0);
        assert_eq!(c.state(), 1.0);
    }

    #[test]
    fn tie_goes_right_and_reset_restores_uphill() {
        let mut c = HandCodedController::default();
        assert_eq!(c.act(0.3, 0.3), -1.0);
        c.act(0.99, 0.99);
        assert_eq!(c.state(), -1.0);
        c.reset();
        assert_eq!(c.state(), 1.0);
    }
}
