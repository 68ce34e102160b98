//! The under-powered car in a valley, with the classic dynamics:
//!
//! ```text
//! v' = clamp(v + 0.001 a - 0.0025 cos(3x), -0.07, 0.07)
//! x' = clamp(x + v', -1.2, 0.6)      (v' = 0 on hitting the left wall)
//! ```

use rand::Rng;

use super::{scale, ActionDecoder, EnvKind, Environment, Transition, GOAL_REWARD};
use crate::genome::Level;
use crate::rng::StreamRng;

pub const POSITION_BOUNDS: (f64, f64) = (-1.2, 0.6);
pub const VELOCITY_BOUNDS: (f64, f64) = (-0.07, 0.07);
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;

pub const FORWARD: usize = 0;
pub const BACKWARD: usize = 1;
pub const COAST: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarState {
    pub position: f64,
    pub velocity: f64,
}

/// (high, high) forward, (low, low) backward, mixed patterns coast.
pub fn decode(bits: [Level; 2]) -> usize {
    match bits {
        [Level::High, Level::High] => FORWARD,
        [Level::Low, Level::Low] => BACKWARD,
        _ => COAST,
    }
}

/// One step of the car dynamics: `(next state, reward, done)`.
pub fn mc_step(state: CarState, action: usize) -> (CarState, f64, bool) {
    let thrust = match action {
        FORWARD => 1.0,
        BACKWARD => -1.0,
        _ => 0.0,
    };
    let mut velocity = (state.velocity + FORCE * thrust - GRAVITY * (3.0 * state.position).cos())
        .clamp(VELOCITY_BOUNDS.0, VELOCITY_BOUNDS.1);
    let mut position = state.position + velocity;
    if position <= POSITION_BOUNDS.0 {
        position = POSITION_BOUNDS.0;
        velocity = 0.0;
    }
    position = position.min(POSITION_BOUNDS.1);
    let done = position > GOAL_POSITION;
    let next = CarState { position, velocity };
    (next, if done { GOAL_REWARD } else { 0.0 }, done)
}

#[derive(Clone, Debug)]
pub struct MountainCar {
    pub state: CarState,
}

impl Default for MountainCar {
    fn default() -> Self {
        MountainCar { state: CarState { position: -0.5, velocity: 0.0 } }
    }
}

impl MountainCar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scaled(&self) -> Vec<f64> {
        vec![
            scale(self.state.position, POSITION_BOUNDS.0, POSITION_BOUNDS.1),
            scale(self.state.velocity, VELOCITY_BOUNDS.0, VELOCITY_BOUNDS.1),
        ]
    }
}

impl Environment for MountainCar {
    fn kind(&self) -> EnvKind {
        EnvKind::MountainCar
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn decoder(&self) -> ActionDecoder {
        ActionDecoder { count: 3, map: decode }
    }

    fn action_name(&self, action: usize) -> &'static str {
        match action {
            FORWARD => "forward",
            BACKWARD => "backward",
            _ => "none",
        }
    }

    fn reset(&mut self, rng: &mut StreamRng) {
        // Any position short of the goal, any velocity.
        self.state = CarState {
            position: rng.random_range(POSITION_BOUNDS.0..GOAL_POSITION),
            velocity: rng.random_range(VELOCITY_BOUNDS.0..=VELOCITY_BOUNDS.1),
        };
    }

    fn observe(&mut self, _rng: &mut StreamRng) -> Vec<f64> {
        self.scaled()
    }

    fn step(&mut self, action: usize) -> Transition {
        let (next, reward, done) = mc_step(self.state, action);
        self.state = next;
        Transition { reward, done, bumped: false }
    }

    fn true_state(&self) -> Vec<f64> {
        vec![self.state.position, self.state.velocity]
    }

    fn at_goal(&self) -> bool {
        self.state.position > GOAL_POSITION
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coasting_from_the_valley_floor() {
        let (s, r, done) = mc_step(CarState { position: 0.0, velocity: 0.0 }, COAST);
        assert!((s.velocity + 0.0025).abs() < 1e-15);
        assert!((s.position + 0.0025).abs() < 1e-15);
        assert_eq!(r, 0.0);
        assert!(!done);
    }

    #[test]
    fn reaching_the_goal_pays_out() {
        let (s, r, done) = mc_step(CarState { position: 0.49, velocity: 0.02 }, FORWARD);
        assert!(s.position > 0.5);
        assert!(done);
        assert_eq!(r, 1000.0);
    }

    #[test]
    fn left_wall_stops_the_car() {
        let (s, _, _) = mc_step(CarState { position: -1.19, velocity: -0.07 }, BACKWARD);
        assert_eq!(s.position, -1.2);
        assert_eq!(s.velocity, 0.0);
    }

    #[test]
    fn every_bit_pattern_has_an_action() {
        use Level::*;
        assert_eq!(decode([High, High]), FORWARD);
        assert_eq!(decode([Low, Low]), BACKWARD);
        assert_eq!(decode([High, Low]), COAST);
        assert_eq!(decode([Low, High]), COAST);
    }

    #[test]
    fn random_starts_are_never_at_the_goal() {
        let mut env = MountainCar::new();
        let mut rng = crate::rng::derive_stream(1, "env");
        for _ in 0..1000 {
            env.reset(&mut rng);
            assert!(!env.at_goal());
            assert!(env.observe(&mut rng).iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
