//! Gradient-switching benchmark: a one-dimensional world, evolvable neural
//! controllers, a generational GA and post-hoc reactivity tests.

pub mod analysis;
pub mod controllers;
pub mod error;
pub mod evolution;
pub mod fitness;
pub mod genome;
pub mod render;
pub mod scenario;
pub mod world;

pub use error::{Error, Result};
