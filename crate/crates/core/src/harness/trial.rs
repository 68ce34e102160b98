//! One trial: match sets, action selection and drop-decision cycles until
//! the goal or the macro-step timeout.

use rand::{Rng, SeedableRng};

use crate::engine::{temporal_target, ActionSet, CycleExit, Engine, Phase, StepRecord, TrialContext};
use crate::env::grid_world::gw_optimal_steps;
use crate::env::{Environment, GridWorld};
use crate::error::{Error, Result};
use crate::evolution::{ga_cycle, GaEvent};
use crate::rng::{StreamRng, Streams};

/// What a trial may change in the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialMode {
    pub phase: Phase,
    /// Reinforcement updates.
    pub learn: bool,
    pub ga: bool,
}

impl TrialMode {
    pub const EXPLORE: TrialMode = TrialMode { phase: Phase::Explore, learn: true, ga: true };
    /// Greedy trials still learn but never run the GA.
    pub const EXPLOIT: TrialMode = TrialMode { phase: Phase::Exploit, learn: true, ga: false };
    /// Measurement only.
    pub const PROBE: TrialMode = TrialMode { phase: Phase::Exploit, learn: false, ga: false };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    pub macro_steps: u64,
    pub atomic_steps: u64,
    pub success: bool,
    pub reward: f64,
}

/// Optional per-trial logs.
#[derive(Default)]
pub struct TrialLogs<'a> {
    pub trace: Option<&'a mut Vec<StepRecord>>,
    pub ga: Option<&'a mut Vec<GaEvent>>,
}

/// Run one trial from the environment's current position. Membranes are
/// reset on entry; the caller places the agent.
pub fn run_trial(
    engine: &mut Engine,
    env: &mut dyn Environment,
    mode: TrialMode,
    trial: u64,
    streams: &mut Streams,
    mut logs: TrialLogs<'_>,
) -> Result<TrialResult> {
    let at = |e: Error| match e {
        Error::Engine(msg) => Error::Engine(format!("trial {trial}: {msg}")),
        other => other,
    };
    engine.reset_membranes();
    let mut ctx = TrialContext::default();
    // Previous action set and the agent steps it controlled.
    let mut previous: Option<(ActionSet, u64)> = None;
    let p = engine.params.clone();
    while ctx.macro_steps < p.max_macro_steps {
        let state = env.observe(&mut streams.env);
        let m = engine.form_match_set(&state, trial, &mut streams.cover).map_err(at)?;
        ctx.macro_steps += 1;
        let pa = engine.prediction_array(&m, &state);
        if let Some((prev, duration)) = previous.take() {
            if mode.learn {
                let target = temporal_target(0.0, pa.max(), ctx.t_total, duration, p.phi, p.rho);
                engine.update_set(&prev.members, target, &prev.state);
                if mode.ga && engine.maybe_trigger_ga(&prev.members, trial) {
                    let ev = ga_cycle(engine, &prev.members, &m.ids(), trial, &mut streams.ga).map_err(at)?;
                    if let Some(log) = logs.ga.as_deref_mut() {
                        log.push(ev);
                    }
                }
            }
        }
        let action =
            pa.select(mode.phase, &mut streams.select).ok_or_else(|| at(Error::engine("empty prediction array")))?;
        let mut aset = ActionSet::from_match(&m, action, state.clone());
        // In a population made only of [M], GA deletion may still remove members.
        aset.members.retain(|id| engine.population.contains(*id));
        ctx.t_since_match = 0;
        let first = env.step(action);
        ctx.t_total += 1;
        ctx.t_since_match += 1;
        if let Some(t) = logs.trace.as_deref_mut() {
            t.push(StepRecord {
                macro_step: ctx.macro_steps,
                step: ctx.t_total,
                true_state: env.true_state(),
                sensed: state,
                action,
                reward: first.reward,
            });
        }
        if aset.members.is_empty() {
            if first.done {
                return Ok(TrialResult {
                    macro_steps: ctx.macro_steps,
                    atomic_steps: ctx.t_total,
                    success: true,
                    reward: first.reward,
                });
            }
            previous = None;
            continue;
        }
        let out = engine
            .drop_decision_cycle(
                &mut aset,
                env,
                &mut ctx,
                first,
                &mut streams.env,
                &mut streams.select,
                logs.trace.as_deref_mut(),
            )
            .map_err(at)?;
        match out.exit {
            CycleExit::Reward(r) => {
                if mode.learn {
                    let target = temporal_target(r, 0.0, ctx.t_total, ctx.t_since_match, p.phi, p.rho);
                    engine.update_set(&aset.members, target, &aset.state);
                    if mode.ga && engine.maybe_trigger_ga(&aset.members, trial) {
                        let ev = ga_cycle(engine, &aset.members, &[], trial, &mut streams.ga).map_err(at)?;
                        if let Some(log) = logs.ga.as_deref_mut() {
                            log.push(ev);
                        }
                    }
                }
                return Ok(TrialResult {
                    macro_steps: ctx.macro_steps,
                    atomic_steps: ctx.t_total,
                    success: true,
                    reward: r,
                });
            }
            CycleExit::Bumped => {
                env.recover_from_bump();
                previous = Some((aset, ctx.t_since_match));
            }
            CycleExit::Dropped(_) => previous = Some((aset, ctx.t_since_match)),
        }
    }
    Ok(TrialResult { macro_steps: ctx.macro_steps, atomic_steps: ctx.t_total, success: false, reward: 0.0 })
}

/// Fresh streams seeded from `rng`, so a probe draws only from its own stream.
pub fn fork_streams(rng: &mut StreamRng) -> Streams {
    let mut next = || StreamRng::seed_from_u64(rng.random());
    Streams { cover: next(), ga: next(), env: next(), select: next(), probe: next() }
}

/// Fixed start of the stability probe.
pub const PROBE_START: (f64, f64) = (0.25, 0.25);

/// Greedy, non-learning grid trial from the fixed start on a copy of the
/// engine. Returns the atomic steps taken.
pub fn stability_probe(engine: &Engine, step: f64, noise: f64, probe_rng: &mut StreamRng) -> Result<u64> {
    let mut shadow = engine.clone();
    let mut streams = fork_streams(probe_rng);
    let mut env = GridWorld::new(step, noise);
    env.set_position(PROBE_START.0, PROBE_START.1);
    let r = run_trial(&mut shadow, &mut env, TrialMode::PROBE, 0, &mut streams, TrialLogs::default())?;
    Ok(r.atomic_steps)
}

/// Tracks consecutive optimal probes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StabilityTracker {
    pub streak: u32,
    pub streak_start: Option<u64>,
    /// Trial index where the first full streak began.
    pub stable_at: Option<u64>,
}

impl StabilityTracker {
    pub fn optimum(step: f64) -> u64 {
        gw_optimal_steps(PROBE_START.0, PROBE_START.1, step)
    }

    pub fn record(&mut self, trial: u64, optimal: bool, required: u32) {
        if !optimal {
            self.streak = 0;
            self.streak_start = None;
            return;
        }
        if self.streak == 0 {
            self.streak_start = Some(trial);
        }
        self.streak += 1;
        if self.stable_at.is_none() && self.streak >= required {
            self.stable_at = self.streak_start;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streak_breaks_on_a_miss() {
        let mut s = StabilityTracker::default();
        for t in 0..49 {
            s.record(t, true, 50);
        }
        s.record(49, false, 50);
        assert_eq!(s.streak, 0);
        assert_eq!(s.stable_at, None);
        for t in 50..100 {
            s.record(t, true, 50);
        }
        assert_eq!(s.stable_at, Some(50));
        s.record(100, false, 50);
        assert_eq!(s.stable_at, Some(50));
    }

    #[test]
    fn probe_optimum_matches_oracle() {
        assert_eq!(StabilityTracker::optimum(0.05), 29);
    }
}
