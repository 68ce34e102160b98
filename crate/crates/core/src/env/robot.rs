//! A 2D kinematic stand-in for the light-seeking robot task.
//!
//! A differential-drive disc moves in the walled square `[-1, 1]^2` around a
//! central box. A light sits in the top-right corner; the agent starts in the
//! bottom-left corner (`x + y < -1.5`) and is rewarded on entering
//! `x + y > 1.6`. Sensors, in state order:
//!
//! | index | sensor                 | relative heading |
//! |-------|------------------------|------------------|
//! | 0..3  | light (left/front/right)| +45, 0, -45 deg |
//! | 3..6  | infrared proximity      | +45, 0, -45 deg |
//!
//! Light readings fall off with the inverse square of the distance to the
//! source, are weighted by the cosine between sensor axis and source bearing,
//! and are zero when the box shadows the source. Infrared readings are
//! `1 - d / range` for the free distance `d` along the sensor ray.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use rand::Rng;

use super::{ActionDecoder, EnvKind, Environment, Transition, GOAL_REWARD};
use crate::genome::Level;
use crate::rng::StreamRng;

pub const FORWARD: usize = 0;
pub const LEFT: usize = 1;
pub const RIGHT: usize = 2;

pub const SENSOR_ANGLES: [f64; 3] = [FRAC_PI_4, 0.0, -FRAC_PI_4];

/// (high, high) and (low, low) drive forward, (high, low) turns left,
/// (low, high) turns right.
pub fn decode(bits: [Level; 2]) -> usize {
    match bits {
        [Level::High, Level::Low] => LEFT,
        [Level::Low, Level::High] => RIGHT,
        _ => FORWARD,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArenaGeometry {
    /// Walls at `+-half_extent`.
    pub half_extent: f64,
    /// The box spans `[-box_half, box_half]^2`.
    pub box_half: f64,
    pub robot_radius: f64,
    /// Distance covered by one forward tick (64 ms at full wheel speed).
    pub forward_step: f64,
    pub wheel_base: f64,
    pub light: (f64, f64),
    /// Distance at which an on-axis light reading saturates at 1.
    pub light_reference: f64,
    pub ir_range: f64,
    pub reverse_distance: f64,
    pub light_noise: f64,
    pub ir_noise: f64,
    pub goal_sum: f64,
    pub start_sum: f64,
}

impl Default for ArenaGeometry {
    fn default() -> Self {
        ArenaGeometry {
            half_extent: 1.0,
            box_half: 0.25,
            robot_radius: 0.055,
            forward_step: 0.008,
            wheel_base: 0.1,
            light: (1.0, 1.0),
            light_reference: 0.5,
            ir_range: 0.25,
            reverse_distance: 0.1,
            light_noise: 0.10,
            ir_noise: 0.02,
            goal_sum: 1.6,
            start_sum: -1.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Clone, Debug)]
pub struct RobotArena {
    pub geometry: ArenaGeometry,
    pub pose: Pose,
    /// Front-left and front-right bump switches from the last step.
    pub bumpers: [bool; 2],
    pub noise_enabled: bool,
}

impl RobotArena {
    pub fn new(geometry: ArenaGeometry) -> Self {
        RobotArena {
            geometry,
            pose: Pose { x: -0.8, y: -0.8, heading: FRAC_PI_4 },
            bumpers: [false; 2],
            noise_enabled: true,
        }
    }

    pub fn is_goal(&self, x: f64, y: f64) -> bool {
        x + y > self.geometry.goal_sum
    }

    fn inside_obstacle(&self, x: f64, y: f64) -> bool {
        let g = &self.geometry;
        x.abs() >= g.half_extent || y.abs() >= g.half_extent || (x.abs() <= g.box_half && y.abs() <= g.box_half)
    }

    /// Whether a disc of the robot's radius at `(x, y)` overlaps a wall or the box.
    pub fn collides(&self, x: f64, y: f64) -> bool {
        let g = &self.geometry;
        let r = g.robot_radius;
        if x - r < -g.half_extent || x + r > g.half_extent || y - r < -g.half_extent || y + r > g.half_extent {
            return true;
        }
        let cx = x.clamp(-g.box_half, g.box_half);
        let cy = y.clamp(-g.box_half, g.box_half);
        (x - cx).powi(2) + (y - cy).powi(2) < r * r
    }

    /// Ray/box intersection parameter in `[t_min, t_max]`, if any.
    fn ray_box(&self, ox: f64, oy: f64, dx: f64, dy: f64, t_min: f64, t_max: f64) -> Option<f64> {
        let b = self.geometry.box_half;
        let mut lo = t_min;
        let mut hi = t_max;
        for (o, d) in [(ox, dx), (oy, dy)] {
            if d.abs() < 1e-15 {
                if o < -b || o > b {
                    return None;
                }
            } else {
                let t1 = (-b - o) / d;
                let t2 = (b - o) / d;
                let (near, far) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                lo = lo.max(near);
                hi = hi.min(far);
                if lo > hi {
                    return None;
                }
            }
        }
        Some(lo)
    }

    /// Free distance from the robot centre to the nearest obstacle along `angle`.
    pub fn ray_distance(&self, x: f64, y: f64, angle: f64) -> f64 {
        let g = &self.geometry;
        let (dx, dy) = (angle.cos(), angle.sin());
        let mut t = f64::INFINITY;
        for (o, d) in [(x, dx), (y, dy)] {
            if d > 1e-15 {
                t = t.min((g.half_extent - o) / d);
            } else if d < -1e-15 {
                t = t.min((-g.half_extent - o) / d);
            }
        }
        if let Some(tb) = self.ray_box(x, y, dx, dy, 0.0, t) {
            t = t.min(tb);
        }
        t
    }

    /// True when the segment from `(x, y)` to the light crosses the box.
    pub fn light_occluded(&self, x: f64, y: f64) -> bool {
        let (lx, ly) = self.geometry.light;
        self.ray_box(x, y, lx - x, ly - y, 0.0, 1.0).is_some()
    }

    /// Noise-free light reading for a sensor at `angle` relative to heading.
    pub fn light_reading(&self, pose: &Pose, angle: f64) -> f64 {
        if self.light_occluded(pose.x, pose.y) {
            return 0.0;
        }
        let (lx, ly) = self.geometry.light;
        let (vx, vy) = (lx - pose.x, ly - pose.y);
        let d2 = vx * vx + vy * vy;
        if d2 == 0.0 {
            return 1.0;
        }
        let bearing = vy.atan2(vx);
        let gain = (bearing - (pose.heading + angle)).cos().max(0.0);
        let intensity = (self.geometry.light_reference.powi(2) / d2).min(1.0);
        intensity * gain
    }

    /// Noise-free infrared proximity for a sensor at `angle` relative to heading.
    pub fn ir_reading(&self, pose: &Pose, angle: f64) -> f64 {
        let g = &self.geometry;
        let free = (self.ray_distance(pose.x, pose.y, pose.heading + angle) - g.robot_radius).max(0.0);
        1.0 - free.min(g.ir_range) / g.ir_range
    }

    pub fn clean_sensors(&self) -> [f64; 6] {
        let mut s = [0.0; 6];
        for (k, &a) in SENSOR_ANGLES.iter().enumerate() {
            s[k] = self.light_reading(&self.pose, a);
            s[3 + k] = self.ir_reading(&self.pose, a);
        }
        s
    }

    /// Wheel displacements per tick for an action (left, right).
    pub fn wheel_speeds(&self, action: usize) -> (f64, f64) {
        let v = self.geometry.forward_step;
        match action {
            LEFT => (v / 2.0, v),
            RIGHT => (v, v / 2.0),
            _ => (v, v),
        }
    }

    /// Pose after one tick of differential-drive motion, ignoring obstacles.
    pub fn integrate(&self, pose: &Pose, action: usize) -> Pose {
        let (vl, vr) = self.wheel_speeds(action);
        let v = (vl + vr) / 2.0;
        let w = (vr - vl) / self.geometry.wheel_base;
        let (x, y, heading) = if w.abs() < 1e-12 {
            (pose.x + v * pose.heading.cos(), pose.y + v * pose.heading.sin(), pose.heading)
        } else {
            let h = pose.heading + w;
            (pose.x + v / w * (h.sin() - pose.heading.sin()), pose.y - v / w * (h.cos() - pose.heading.cos()), h)
        };
        Pose { x, y, heading: heading.rem_euclid(TAU) }
    }

    fn bumper_flags(&self, pose: &Pose) -> [bool; 2] {
        let reach = self.geometry.robot_radius + 0.01;
        let mut flags = [false; 2];
        for (k, a) in [FRAC_PI_4, -FRAC_PI_4].into_iter().enumerate() {
            let (px, py) = (pose.x + reach * (pose.heading + a).cos(), pose.y + reach * (pose.heading + a).sin());
            flags[k] = self.inside_obstacle(px, py);
        }
        if !flags[0] && !flags[1] {
            flags = [true, true];
        }
        flags
    }

    /// One 64 ms tick: `(reward, done, bumped)`. A blocked move leaves the
    /// pose unchanged and trips the bumpers.
    pub fn robot_step(&mut self, action: usize) -> (f64, bool, bool) {
        let next = self.integrate(&self.pose, action);
        if self.collides(next.x, next.y) {
            self.bumpers = self.bumper_flags(&next);
            return (0.0, false, true);
        }
        self.bumpers = [false; 2];
        self.pose = next;
        let done = self.is_goal(next.x, next.y);
        (if done { GOAL_REWARD } else { 0.0 }, done, false)
    }

    /// Back up along the heading by the reverse distance, stopping short of
    /// anything behind.
    pub fn reverse(&mut self) {
        const INCREMENTS: usize = 20;
        let stride = self.geometry.reverse_distance / INCREMENTS as f64;
        let (dx, dy) = (-self.pose.heading.cos() * stride, -self.pose.heading.sin() * stride);
        for _ in 0..INCREMENTS {
            let (nx, ny) = (self.pose.x + dx, self.pose.y + dy);
            if self.collides(nx, ny) {
                break;
            }
            self.pose.x = nx;
            self.pose.y = ny;
        }
        self.bumpers = [false; 2];
    }
}

impl Environment for RobotArena {
    fn kind(&self) -> EnvKind {
        EnvKind::Robot
    }

    fn state_dim(&self) -> usize {
        6
    }

    fn decoder(&self) -> ActionDecoder {
        ActionDecoder { count: 3, map: decode }
    }

    fn action_name(&self, action: usize) -> &'static str {
        ["forward", "left", "right"][action.min(2)]
    }

    fn reset(&mut self, rng: &mut StreamRng) {
        let g = self.geometry;
        let lim = g.half_extent - g.robot_radius;
        loop {
            let x = rng.random_range(-lim..lim);
            let y = rng.random_range(-lim..lim);
            if x + y < g.start_sum && !self.collides(x, y) {
                let heading = rng.random_range(-PI..PI).rem_euclid(TAU);
                self.pose = Pose { x, y, heading };
                self.bumpers = [false; 2];
                return;
            }
        }
    }

    fn observe(&mut self, rng: &mut StreamRng) -> Vec<f64> {
        let clean = self.clean_sensors();
        let g = self.geometry;
        clean
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                if !self.noise_enabled {
                    return v;
                }
                let amp = if k < 3 { g.light_noise } else { g.ir_noise };
                (v * (1.0 + rng.random_range(-amp..=amp))).clamp(0.0, 1.0)
            })
            .collect()
    }

    fn step(&mut self, action: usize) -> Transition {
        let (reward, done, bumped) = self.robot_step(action);
        Transition { reward, done, bumped }
    }

    fn recover_from_bump(&mut self) {
        self.reverse();
    }

    fn true_state(&self) -> Vec<f64> {
        vec![self.pose.x, self.pose.y, self.pose.heading]
    }

    fn at_goal(&self) -> bool {
        self.is_goal(self.pose.x, self.pose.y)
    }
}
