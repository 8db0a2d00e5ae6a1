//! Controller substrates behind a single act-per-timestep interface.

mod ann;
mod archetypes;
mod ctrnn;
mod handcoded;

pub use ann::{activation, AnnController, AnnGenome, ANN_CONNECTIONS, ANN_GENES, ANN_NEURONS};
pub use archetypes::{DriftController, ParkingController, ZigzagController};
pub use ctrnn::{
    center_crossing_theta, logistic, Ctrnn, CtrnnGenome, CtrnnSettings, CTRNN_GENES, CTRNN_NODES,
};
pub use handcoded::HandCodedController;

use serde::{Deserialize, Serialize};

/// Anything that maps the two lateral sensor readings to a motor command.
///
/// A positive output drives the agent left, a negative one right.
pub trait Controller: Send {
    /// Restores the initial internal state.
    fn reset(&mut self);

    /// Advances the controller by one world time step.
    fn act(&mut self, left: f64, right: f64) -> f64;
}

impl<C: Controller + ?Sized> Controller for Box<C> {
    fn reset(&mut self) {
        (**self).reset()
    }

    fn act(&mut self, left: f64, right: f64) -> f64 {
        (**self).act(left, right)
    }
}

/// How a real-valued controller output becomes a cell step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveMode {
    /// Every step moves one cell; an output of exactly zero goes right.
    #[default]
    AlwaysMove,
    /// Outputs inside `[-0.1, 0.1]` keep the agent in place.
    WithRest,
}

pub const REST_DEADZONE: f64 = 0.1;

pub fn output_to_delta(output: f64, mode: MoveMode) -> i32 {
    match mode {
        MoveMode::AlwaysMove => {
            if output > 0.0 {
                -1
            } else {
                1
            }
        }
        MoveMode::WithRest => {
            if output > REST_DEADZONE {
                -1
            } else if output < -REST_DEADZONE {
                1
            } else {
                0
            }
        }
    }
}
