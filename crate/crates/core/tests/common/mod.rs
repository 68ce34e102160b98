#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use stcs::env::grid_world::{gw_step, is_goal};
use stcs::harness::ExperimentConfig;
use stcs::EnvKind;

/// Breadth-first search over the deterministic grid dynamics. Positions are
/// keyed by rounding to 1e-9 so float drift cannot split states.
pub fn bfs_optimal(x: f64, y: f64, step: f64) -> u64 {
    if is_goal(x, y) {
        return 0;
    }
    let key = |x: f64, y: f64| ((x * 1e9).round() as i64, (y * 1e9).round() as i64);
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(key(x, y));
    queue.push_back((x, y, 0u64));
    while let Some((x, y, d)) = queue.pop_front() {
        for a in 0..4 {
            let (nx, ny, _, done) = gw_step(x, y, a, step);
            if done {
                return d + 1;
            }
            if seen.insert(key(nx, ny)) {
                queue.push_back((nx, ny, d + 1));
            }
        }
    }
    unreachable!("the goal is always reachable")
}

pub fn config(env: EnvKind, trials: u64, cap: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(env, 0.05);
    c.trials = trials;
    c.engine.population_cap = cap;
    c.repeats = 1;
    c
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and standard error of consecutive windows of `w` values.
pub fn window_stats(v: &[f64], w: usize) -> Vec<(f64, f64)> {
    v.chunks(w)
        .filter(|c| c.len() == w)
        .map(|c| {
            let m = mean(c);
            let var = c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (w as f64 - 1.0);
            (m, (var / w as f64).sqrt())
        })
        .collect()
}
