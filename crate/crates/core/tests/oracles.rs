//! Closed-form and independently computed reference values.

mod common;

use rand::Rng;
use stcs::classifier::{compute_prediction, Classifier, InitialParams, SelfAdaptiveRates};
use stcs::engine::{accuracy, temporal_target, Engine, EngineParams, MatchEntry, MatchSet};
use stcs::env::grid_world::{self, gw_optimal_steps};
use stcs::env::{mountain_car, Environment};
use stcs::genome::{Genome, NetworkSpec, Representation};
use stcs::harness::welch_t_test;
use stcs::rng::derive_stream;
use stcs::spiking::{Polarity, SpikingNetwork};

fn lone_input(input: f64, steps: usize) -> Vec<(f64, bool)> {
    let mut net = SpikingNetwork::new(1, &[Polarity::Excitatory]).unwrap();
    (0..steps)
        .map(|_| {
            let fired = net.step(&[input]).unwrap()[0];
            (net.membranes()[0], fired)
        })
        .collect()
}

#[test]
fn isolated_neuron_trajectories() {
    let quiet = lone_input(0.0, 6);
    let want = [(0.3, false), (0.585, false), (0.85575, false), (0.0, true), (0.3, false), (0.585, false)];
    for ((m, f), (wm, wf)) in quiet.iter().zip(want) {
        assert!((m - wm).abs() < 1e-12);
        assert_eq!(*f, wf);
    }
    let half = lone_input(0.5, 6);
    for (k, (m, f)) in half.iter().enumerate() {
        let spike = k % 2 == 1;
        assert_eq!(*f, spike);
        assert!((m - if spike { 0.0 } else { 0.8 }).abs() < 1e-12);
    }
    assert!(lone_input(1.0, 6).iter().all(|(m, f)| *f && *m == 0.0));
}

#[test]
fn computed_prediction_by_hand() {
    assert_eq!(compute_prediction(&[0.0; 3], &[0.4, 0.6], 1.0), 0.0);
    assert_eq!(compute_prediction(&[5.0, 0.0, 0.0], &[0.4, 0.6], 1.0), 5.0);
    assert!((compute_prediction(&[1.0, 2.0, 3.0], &[0.5, 0.5], 1.0) - 3.5).abs() < 1e-12);
}

#[test]
fn temporal_targets_by_hand() {
    let t = |r, m, tt, ti| temporal_target(r, m, tt, ti, 0.45, 0.005);
    assert!((t(1000.0, 0.0, 1, 0) - 637.6281516217733).abs() < 1e-12);
    assert!((t(0.0, 500.0, 0, 10) - 475.614712250357).abs() < 1e-12);
    assert!((t(1000.0, 0.0, 5, 5) - 105.39922456186433).abs() < 1e-12);
    assert!((t(1000.0, 250.0, 7, 3) - 289.13011176780583).abs() < 1e-12);
    assert_eq!(t(0.0, 0.0, 17, 4), 0.0);
}

fn engine_with(n: usize, state_dim: usize) -> Engine {
    let spec = NetworkSpec { representation: Representation::Spiking, inputs: state_dim, hidden: 1, density: 1.0 };
    let mut e = Engine::new(EngineParams::default(), spec, grid_world::GridWorld::new(0.05, 0.0).decoder()).unwrap();
    let mut rng = derive_stream(3, "o");
    for _ in 0..n {
        let g = Genome::random(&spec, &mut rng).unwrap();
        let id = e.population.allocate_id();
        e.population.insert(Classifier::new(id, g, SelfAdaptiveRates::uniform(0.5), &InitialParams::default(), 0));
    }
    e
}

#[test]
fn delta_rule_matches_reference_sequence() {
    let mut e = engine_with(1, 2);
    let state = [0.3, 0.7];
    let want = [(20.0, 20.008000000000003), (36.0, 32.0064), (48.8, 38.40512)];
    for (p, err) in want {
        e.update_set(&[0], 100.0, &state);
        let cl = e.population.get(0).unwrap();
        assert!((cl.prediction(&state, 1.0) - p).abs() < 1e-12);
        assert!((cl.error - err).abs() < 1e-12);
    }
    let w = &e.population.get(0).unwrap().weights;
    assert!((w[0] - 30.88607594936709).abs() < 1e-12);
}

#[test]
fn delta_rule_residual_shrinks_geometrically() {
    let mut e = engine_with(1, 3);
    let state = [0.9, 0.1, 0.5];
    let eta = e.params.eta;
    let mut last = 250.0f64;
    for _ in 0..40 {
        e.update_set(&[0], 250.0, &state);
        let r = (250.0 - e.population.get(0).unwrap().prediction(&state, 1.0)).abs();
        assert!(r <= (1.0 - eta) * last + 1e-9);
        last = r;
    }
}

#[test]
fn accuracy_and_fitness_update() {
    let p = EngineParams { epsilon0: 10.0, ..EngineParams::default() };
    assert_eq!(accuracy(9.99, &p), 1.0);
    assert!((accuracy(20.0, &p) - 0.1 * 2f64.powi(-5)).abs() < 1e-15);
    let d = EngineParams::default();
    assert_eq!(accuracy(0.005, &d), 1.0);
    assert!((accuracy(0.02, &d) - 0.1 * 2f64.powi(-5)).abs() < 1e-15);
    let mut e = engine_with(2, 2);
    e.params = p.clone();
    e.population.get_mut(1).unwrap().error = 20.0;
    // residual 0 keeps errors near their values for this update
    e.update_set(&[0, 1], 0.0, &[0.0, 0.0]);
    let e0 = e.population.get(0).unwrap();
    let e1 = e.population.get(1).unwrap();
    let k0 = accuracy(e0.error, &p);
    let k1 = accuracy(e1.error, &p);
    let f0 = 0.01 + 0.2 * (k0 / (k0 + k1) - 0.01);
    let f1 = 0.01 + 0.2 * (k1 / (k0 + k1) - 0.01);
    assert!((e0.fitness - f0).abs() < 1e-12);
    assert!((e1.fitness - f1).abs() < 1e-12);
    assert!((e0.action_set_size - (1.0 + 0.2 * (2.0 - 1.0))).abs() < 1e-12);
}

#[test]
fn prediction_array_weighted_mean() {
    let mut e = engine_with(2, 2);
    for (id, (w0, f)) in [(0u64, (10.0, 1.0)), (1, (30.0, 3.0))] {
        let c = e.population.get_mut(id).unwrap();
        c.weights = vec![w0, 0.0, 0.0];
        c.fitness = f;
    }
    let m = MatchSet { entries: vec![MatchEntry { id: 0, action: 2 }, MatchEntry { id: 1, action: 2 }] };
    let pa = e.prediction_array(&m, &[0.2, 0.2]);
    assert_eq!(pa.values[2], Some(25.0));
    assert_eq!(pa.values[0], None);
}

#[test]
fn explore_selection_follows_shifted_shares() {
    use stcs::engine::PredictionArray;
    let pa = PredictionArray { values: vec![Some(0.0), Some(0.0), Some(1000.0)] };
    let mut rng = derive_stream(11, "sel");
    let n = 10_000;
    let mut counts = [0usize; 3];
    for _ in 0..n {
        counts[pa.roulette_action(&mut rng).unwrap()] += 1;
    }
    // shifted weights 1, 1, 1001
    let total = 1003.0;
    let expect = [1.0 / total, 1.0 / total, 1001.0 / total].map(|p| p * n as f64);
    let chi2: f64 = counts.iter().zip(expect).map(|(&c, e)| (c as f64 - e).powi(2) / e).sum();
    // 99.9th percentile of chi-square with 2 degrees of freedom
    assert!(chi2 < 13.816, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn grid_optimum_agrees_with_breadth_first_search() {
    let mut rng = derive_stream(21, "bfs");
    for step in [0.05, 0.005] {
        let mut checked = 0;
        while checked < 100 {
            let (x, y): (f64, f64) = (rng.random(), rng.random());
            if grid_world::is_goal(x, y) {
                continue;
            }
            assert_eq!(gw_optimal_steps(x, y, step), common::bfs_optimal(x, y, step), "start ({x}, {y}) step {step}");
            checked += 1;
        }
    }
    assert_eq!(gw_optimal_steps(0.25, 0.25, 0.05), 29);
    assert_eq!(common::bfs_optimal(0.25, 0.25, 0.05), 29);
}

#[test]
fn welch_matches_reference_implementation() {
    let a = [12.1, 14.3, 13.8, 15.2, 12.9, 13.5, 14.8, 13.1, 12.4, 14.0];
    let b = [15.9, 16.2, 14.8, 17.1, 16.6, 15.3, 16.9, 15.8, 17.4, 16.0];
    let r = welch_t_test(&a, &b).unwrap();
    assert!((r.t - -6.325440712873305).abs() < 1e-9);
    assert!((r.p_value - 7.125143276619315e-06).abs() < 1e-9);
    let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.5, 3.1, 4.7, 2.2, 6.0, 5.5, 3.3]).unwrap();
    assert!((r.t - -0.9935952761754018).abs() < 1e-9);
    assert!((r.p_value - 0.34800119550816405).abs() < 1e-6);
    let x = [8.396, 7.351, 9.503, 10.841, 12.272, 10.219, 8.895, 8.43];
    let y = [13.246, 15.904, 11.818, 7.3, 8.125, 15.8, 11.609, 5.804, 10.749, 7.51, 9.112, 9.536];
    let r = welch_t_test(&x, &y).unwrap();
    assert!((r.p_value - 0.3495369578834401).abs() < 1e-6);
}

#[test]
fn mountain_car_step_by_hand() {
    use mountain_car::{mc_step, CarState, FORWARD};
    let s = CarState { position: -0.5, velocity: 0.0 };
    let (n, r, done) = mc_step(s, FORWARD);
    let v = 0.001 - 0.0025 * (3.0f64 * -0.5).cos();
    assert!((n.velocity - v).abs() < 1e-15);
    assert!((n.position - (-0.5 + v)).abs() < 1e-15);
    assert_eq!((r, done), (0.0, false));
}
