//! The three semi-MDP tasks.
//!
//! Every environment exposes its sensed state scaled to `[0, 1]^d` and maps
//! the two action bits computed by a classifier network onto one of its
//! discrete actions.

pub mod grid_world;
pub mod mountain_car;
pub mod robot;

use std::fmt;
use std::str::FromStr;

pub use grid_world::GridWorld;
pub use mountain_car::MountainCar;
pub use robot::RobotArena;

use crate::error::{Error, Result};
use crate::genome::Level;
use crate::rng::StreamRng;

/// External reward for reaching any goal.
pub const GOAL_REWARD: f64 = 1000.0;

/// Result of one agent step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub reward: f64,
    pub done: bool,
    pub bumped: bool,
}

/// Maps a network's action bits to an environment action index.
#[derive(Clone, Copy, Debug)]
pub struct ActionDecoder {
    pub count: usize,
    pub map: fn([Level; 2]) -> usize,
}

impl ActionDecoder {
    pub fn decode(&self, bits: [Level; 2]) -> usize {
        (self.map)(bits)
    }
}

pub trait Environment {
    fn kind(&self) -> EnvKind;

    fn state_dim(&self) -> usize;

    fn decoder(&self) -> ActionDecoder;

    fn action_name(&self, action: usize) -> &'static str;

    /// Place the agent at a random non-goal start.
    fn reset(&mut self, rng: &mut StreamRng);

    /// Sensed, scaled state; noise is drawn from `rng`.
    fn observe(&mut self, rng: &mut StreamRng) -> Vec<f64>;

    fn step(&mut self, action: usize) -> Transition;

    /// Called by the trial loop after a step reports `bumped`.
    fn recover_from_bump(&mut self) {}

    /// Environment-native true state, for trajectory dumps.
    fn true_state(&self) -> Vec<f64>;

    fn at_goal(&self) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnvKind {
    MountainCar,
    GridWorld,
    Robot,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::MountainCar => "mountain-car",
            EnvKind::GridWorld => "grid",
            EnvKind::Robot => "robot",
        })
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mountain-car" | "mountain_car" | "mc" => Ok(EnvKind::MountainCar),
            "grid" | "grid-world" | "grid_world" => Ok(EnvKind::GridWorld),
            "robot" => Ok(EnvKind::Robot),
            other => Err(Error::config(format!("unknown environment `{other}`"))),
        }
    }
}

/// Scale `value` from `[lo, hi]` to `[0, 1]`, clamping out-of-range values.
pub fn scale(value: f64, lo: f64, hi: f64) -> f64 {
    ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
}
