//! The continuous grid world: a point agent in the unit square moving a fixed
//! distance per step towards the corner region `x + y > 1.9`.

use rand::Rng;

use super::{ActionDecoder, EnvKind, Environment, Transition, GOAL_REWARD};
use crate::genome::Level;
use crate::rng::StreamRng;

pub const GOAL_SUM: f64 = 1.9;
/// Tolerance on the strict goal inequality so that float accumulation along a
/// lattice path never turns `x + y == 1.9` into a goal.
pub const GOAL_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_NOISE: f64 = 0.05;

pub const NORTH: usize = 0;
pub const EAST: usize = 1;
pub const SOUTH: usize = 2;
pub const WEST: usize = 3;

pub fn is_goal(x: f64, y: f64) -> bool {
    x + y > GOAL_SUM + GOAL_TOLERANCE
}

pub fn decode(bits: [Level; 2]) -> usize {
    match bits {
        [Level::High, Level::High] => NORTH,
        [Level::High, Level::Low] => EAST,
        [Level::Low, Level::High] => SOUTH,
        [Level::Low, Level::Low] => WEST,
    }
}

/// Move `step` along a compass direction and clamp to the unit square.
/// Returns `(x', y', reward, done)`.
pub fn gw_step(x: f64, y: f64, action: usize, step: f64) -> (f64, f64, f64, bool) {
    let (dx, dy) = match action {
        NORTH => (0.0, step),
        EAST => (step, 0.0),
        SOUTH => (0.0, -step),
        _ => (-step, 0.0),
    };
    let nx = (x + dx).clamp(0.0, 1.0);
    let ny = (y + dy).clamp(0.0, 1.0);
    let done = is_goal(nx, ny);
    (nx, ny, if done { GOAL_REWARD } else { 0.0 }, done)
}

/// Fewest atomic moves from `(x, y)` to the goal, moving only north or east.
pub fn gw_optimal_steps(x: f64, y: f64, step: f64) -> u64 {
    if is_goal(x, y) {
        return 0;
    }
    let deficit = GOAL_SUM + GOAL_TOLERANCE - (x + y);
    (deficit / step).floor() as u64 + 1
}

#[derive(Clone, Debug)]
pub struct GridWorld {
    pub x: f64,
    pub y: f64,
    pub step_size: f64,
    /// Maximum relative sensor error per axis.
    pub noise: f64,
}

impl GridWorld {
    pub fn new(step_size: f64, noise: f64) -> Self {
        GridWorld { x: 0.25, y: 0.25, step_size, noise }
    }

    pub fn set_position(&mut self, x: f64, y: f64) {
        self.x = x.clamp(0.0, 1.0);
        self.y = y.clamp(0.0, 1.0);
    }
}

impl Environment for GridWorld {
    fn kind(&self) -> EnvKind {
        EnvKind::GridWorld
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn decoder(&self) -> ActionDecoder {
        ActionDecoder { count: 4, map: decode }
    }

    fn action_name(&self, action: usize) -> &'static str {
        ["north", "east", "south", "west"][action.min(3)]
    }

    fn reset(&mut self, rng: &mut StreamRng) {
        loop {
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            if !is_goal(x, y) {
                self.x = x;
                self.y = y;
                return;
            }
        }
    }

    /// Multiplicative noise: each axis reads `true * (1 + u)`, `u` uniform in
    /// `[-noise, noise]`, clamped back into the square.
    fn observe(&mut self, rng: &mut StreamRng) -> Vec<f64> {
        if self.noise == 0.0 {
            return vec![self.x, self.y];
        }
        let mut sense = |v: f64| (v * (1.0 + rng.random_range(-self.noise..=self.noise))).clamp(0.0, 1.0);
        let sx = sense(self.x);
        let sy = sense(self.y);
        vec![sx, sy]
    }

    fn step(&mut self, action: usize) -> Transition {
        let (x, y, reward, done) = gw_step(self.x, self.y, action, self.step_size);
        self.x = x;
        self.y = y;
        Transition { reward, done, bumped: false }
    }

    fn true_state(&self) -> Vec<f64> {
        vec![self.x, self.y]
    }

    fn at_goal(&self) -> bool {
        is_goal(self.x, self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compass_moves_and_wall_clamp() {
        let (x, y, _, _) = gw_step(0.5, 0.5, NORTH, 0.05);
        assert_eq!(x, 0.5);
        assert!((y - 0.55).abs() < 1e-15);
        let (x, y, _, _) = gw_step(0.0, 0.5, WEST, 0.05);
        assert_eq!((x, y), (0.0, 0.5));
    }

    #[test]
    fn goal_corner_pays() {
        let (_, _, r, done) = gw_step(0.95, 0.95, NORTH, 0.05);
        assert!(done);
        assert_eq!(r, 1000.0);
        // moving south drops the sum to 1.85
        let (_, _, r, done) = gw_step(0.95, 0.95, SOUTH, 0.05);
        assert!(!done);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn optimal_step_examples() {
        assert_eq!(gw_optimal_steps(0.25, 0.25, 0.05), 29);
        assert_eq!(gw_optimal_steps(0.9, 0.95, 0.05), 2);
        assert_eq!(gw_optimal_steps(0.94, 0.95, 0.05), 1);
    }

    #[test]
    fn bit_patterns_map_to_compass() {
        use Level::*;
        assert_eq!(decode([High, High]), NORTH);
        assert_eq!(decode([High, Low]), EAST);
        assert_eq!(decode([Low, High]), SOUTH);
        assert_eq!(decode([Low, Low]), WEST);
    }

    #[test]
    fn noisy_observations_stay_in_range_and_near_truth() {
        let mut env = GridWorld::new(0.05, DEFAULT_NOISE);
        let mut rng = crate::rng::derive_stream(5, "env");
        for _ in 0..500 {
            env.reset(&mut rng);
            assert!(!env.at_goal());
            let s = env.observe(&mut rng);
            assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!((s[0] - env.x).abs() <= 0.05 * env.x + 1e-12);
        }
    }
}
