//! The classifier system: match and action sets, covering, the
//! drop-decision cycle and temporal reinforcement.

mod params;
pub mod population;
pub mod subsumption;

use std::sync::Arc;

use rand::Rng;

pub use params::EngineParams;
pub use population::{roulette, Inserted, Population};

use crate::classifier::{Classifier, ClassifierId, SelfAdaptiveRates};
use crate::env::{ActionDecoder, Environment, Transition};
use crate::error::{Error, Result};
use crate::genome::{Genome, NetworkSpec, Representation};
use crate::rng::StreamRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Explore,
    Exploit,
}

/// Step counters for the trial in progress.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialContext {
    /// Agent steps taken this trial.
    pub t_total: u64,
    /// Agent steps since the last match set was formed.
    pub t_since_match: u64,
    pub macro_steps: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchEntry {
    pub id: ClassifierId,
    pub action: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchSet {
    pub entries: Vec<MatchEntry>,
}

impl MatchSet {
    pub fn ids(&self) -> Vec<ClassifierId> {
        self.entries.iter().map(|e| e.id).collect()
    }

    pub fn actions(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.entries.iter().map(|e| e.action).collect();
        a.sort_unstable();
        a.dedup();
        a
    }
}

/// Fitness-weighted mean prediction per action; `None` where no classifier
/// advocates the action.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionArray {
    pub values: Vec<Option<f64>>,
}

impl PredictionArray {
    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Highest value, lowest index on ties.
    pub fn best_action(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (a, v) in self.values.iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((a, v));
                }
            }
        }
        best.map(|(a, _)| a)
    }

    /// Roulette over values shifted so the smallest becomes 1.
    pub fn roulette_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let min = self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = self.values.iter().map(|v| v.map_or(0.0, |v| v - min + 1.0)).collect();
        roulette(&weights, rng)
    }

    pub fn select<R: Rng + ?Sized>(&self, phase: Phase, rng: &mut R) -> Option<usize> {
        match phase {
            Phase::Explore => self.roulette_action(rng),
            Phase::Exploit => self.best_action(),
        }
    }
}

/// The classifiers controlling the agent, with the state they were formed on.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSet {
    pub members: Vec<ClassifierId>,
    pub action: usize,
    pub state: Vec<f64>,
}

impl ActionSet {
    pub fn from_match(m: &MatchSet, action: usize, state: Vec<f64>) -> Self {
        let members = m.entries.iter().filter(|e| e.action == action).map(|e| e.id).collect();
        ActionSet { members, action, state }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropCause {
    /// No member matched the new state.
    NoMatch,
    /// `t_drop` agent steps were taken under this set.
    Timeout,
    /// The roulette picked a non-matching member.
    Roulette,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CycleExit {
    Dropped(DropCause),
    /// The goal was reached; carries the external reward.
    Reward(f64),
    /// The robot hit an obstacle; the set is dropped.
    Bumped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleOutcome {
    /// Agent steps taken inside the cycle, not counting the first action.
    pub continued_steps: u64,
    pub exit: CycleExit,
    /// Members discarded from the set, in removal order.
    pub removed: Vec<ClassifierId>,
}

/// One executed agent step, for trajectory dumps.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub macro_step: u64,
    pub step: u64,
    pub true_state: Vec<f64>,
    pub sensed: Vec<f64>,
    pub action: usize,
    pub reward: f64,
}

/// `P = exp(-phi t_total) r + exp(-rho t_since) max_p`.
pub fn temporal_target(r: f64, max_p: f64, t_total: u64, t_since: u64, phi: f64, rho: f64) -> f64 {
    (-phi * t_total as f64).exp() * r + (-rho * t_since as f64).exp() * max_p
}

/// Accuracy from prediction error.
pub fn accuracy(error: f64, params: &EngineParams) -> f64 {
    if error < params.epsilon0 {
        1.0
    } else {
        params.alpha * (error / params.epsilon0).powf(-params.nu)
    }
}

#[derive(Clone, Debug)]
pub struct Engine {
    pub params: EngineParams,
    pub spec: NetworkSpec,
    pub decoder: ActionDecoder,
    pub population: Population,
    probes: Arc<Vec<Vec<f64>>>,
}

impl Engine {
    pub fn new(params: EngineParams, spec: NetworkSpec, decoder: ActionDecoder) -> Result<Self> {
        params.validate()?;
        if spec.hidden == 0 {
            return Err(Error::config("at least one hidden neuron is required"));
        }
        if !(0.0..=1.0).contains(&spec.density) {
            return Err(Error::config("connection density must lie in [0, 1]"));
        }
        let probes = Arc::new(subsumption::probe_states(spec.inputs));
        Ok(Engine { params, spec, decoder, population: Population::new(), probes })
    }

    pub fn probe_states(&self) -> &[Vec<f64>] {
        &self.probes
    }

    pub fn reset_membranes(&mut self) {
        for cl in self.population.iter_mut() {
            cl.genome.reset_membranes();
        }
    }

    /// Evaluate every classifier on `state` and cover missing actions.
    pub fn form_match_set(&mut self, state: &[f64], trial: u64, rng: &mut StreamRng) -> Result<MatchSet> {
        let decoder = self.decoder;
        let mut entries = Vec::new();
        for cl in self.population.iter_mut() {
            let d = cl.genome.evaluate(state)?;
            if d.matches {
                entries.push(MatchEntry { id: cl.id, action: decoder.decode(d.action_bits) });
            }
        }
        // Deletion during covering may, in tiny populations, remove a member
        // of the set being built, so loop until every action is present.
        for _ in 0..4 * decoder.count + 4 {
            let Some(missing) = (0..decoder.count).find(|a| !entries.iter().any(|e| e.action == *a)) else {
                return Ok(MatchSet { entries });
            };
            let cl = self.cover(state, missing, trial, rng)?;
            let protected: Vec<ClassifierId> = entries.iter().map(|e| e.id).collect();
            let placed = self.population.insert_and_enforce_cap(vec![cl], &self.params, &protected, rng);
            entries.push(MatchEntry { id: placed[0].id(), action: missing });
            let pop = &self.population;
            entries.retain(|e| pop.contains(e.id));
        }
        Err(Error::engine("population cap too small to hold one classifier per action"))
    }

    /// Generate random networks until one matches `state` and advocates
    /// `missing`. A spiking candidate may use a few consecutive presentation
    /// windows to settle, and keeps the membranes it reached.
    pub fn cover(&mut self, state: &[f64], missing: usize, trial: u64, rng: &mut StreamRng) -> Result<Classifier> {
        if missing >= self.decoder.count {
            return Err(Error::engine(format!("action {missing} is not legal")));
        }
        let windows = match self.spec.representation {
            Representation::Spiking => self.params.cover_windows,
            Representation::Mlp => 1,
        };
        for _ in 0..self.params.cover_attempt_cap {
            let mut genome = Genome::random(&self.spec, rng)?;
            for _ in 0..windows {
                let d = genome.evaluate(state)?;
                if d.matches && self.decoder.decode(d.action_bits) == missing {
                    let rates = SelfAdaptiveRates::random(rng, self.params.rate_min);
                    let id = self.population.allocate_id();
                    return Ok(Classifier::new(id, genome, rates, &self.params.initial, trial));
                }
            }
        }
        Err(Error::engine(format!(
            "covering found no network for action {missing} after {} attempts",
            self.params.cover_attempt_cap
        )))
    }

    pub fn prediction_array(&self, m: &MatchSet, state: &[f64]) -> PredictionArray {
        let mut num = vec![0.0; self.decoder.count];
        let mut den = vec![0.0; self.decoder.count];
        for e in &m.entries {
            if let Some(cl) = self.population.get(e.id) {
                let w = cl.fitness * cl.numerosity as f64;
                num[e.action] += w * cl.prediction(state, self.params.x0);
                den[e.action] += w;
            }
        }
        let present: Vec<bool> = (0..self.decoder.count).map(|a| m.entries.iter().any(|e| e.action == a)).collect();
        let values = (0..self.decoder.count)
            .map(|a| {
                if !present[a] {
                    None
                } else if den[a] > 0.0 {
                    Some(num[a] / den[a])
                } else {
                    Some(0.0)
                }
            })
            .collect();
        PredictionArray { values }
    }

    fn cycle_scores(&self, members: &[ClassifierId], state: &[f64]) -> Vec<f64> {
        let preds: Vec<f64> = members
            .iter()
            .map(|id| self.population.get(*id).map_or(0.0, |c| c.prediction(state, self.params.x0)))
            .collect();
        let min = preds.iter().copied().fold(f64::INFINITY, f64::min);
        members
            .iter()
            .zip(&preds)
            .map(|(id, p)| self.population.get(*id).map_or(0.0, |c| c.fitness * c.numerosity as f64 * (p - min + 1.0)))
            .collect()
    }

    /// Keep the action set in control until it drops, the goal is reached or
    /// an obstacle is hit. `first` is the transition of the action already
    /// executed when the set was formed.
    #[allow(clippy::too_many_arguments)]
    pub fn drop_decision_cycle(
        &mut self,
        aset: &mut ActionSet,
        env: &mut dyn Environment,
        ctx: &mut TrialContext,
        first: Transition,
        env_rng: &mut StreamRng,
        select_rng: &mut StreamRng,
        mut trace: Option<&mut Vec<StepRecord>>,
    ) -> Result<CycleOutcome> {
        if aset.members.is_empty() {
            return Err(Error::engine("drop-decision cycle entered with an empty action set"));
        }
        let mut out =
            CycleOutcome { continued_steps: 0, exit: CycleExit::Dropped(DropCause::Timeout), removed: Vec::new() };
        let mut last = first;
        loop {
            if last.done {
                out.exit = CycleExit::Reward(last.reward);
                return Ok(out);
            }
            if last.bumped {
                out.exit = CycleExit::Bumped;
                return Ok(out);
            }
            if ctx.t_since_match >= self.params.t_drop {
                out.exit = CycleExit::Dropped(DropCause::Timeout);
                return Ok(out);
            }
            let state = env.observe(env_rng);
            let decoder = self.decoder;
            let mut verdicts = Vec::with_capacity(aset.members.len());
            for id in &aset.members {
                let cl = self
                    .population
                    .get_mut(*id)
                    .ok_or_else(|| Error::engine(format!("action set member {id} missing from population")))?;
                let d = cl.genome.evaluate(&state)?;
                verdicts.push((*id, d.matches, decoder.decode(d.action_bits)));
            }
            let matching = verdicts.iter().filter(|v| v.1).count();
            if matching == 0 {
                out.exit = CycleExit::Dropped(DropCause::NoMatch);
                return Ok(out);
            }
            if matching < verdicts.len() {
                let scores = self.cycle_scores(&aset.members, &state);
                let pick = roulette(&scores, select_rng).unwrap_or(0);
                let keep_matching = verdicts[pick].1;
                for v in &verdicts {
                    if v.1 != keep_matching {
                        out.removed.push(v.0);
                    }
                }
                verdicts.retain(|v| v.1 == keep_matching);
                aset.members = verdicts.iter().map(|v| v.0).collect();
                if !keep_matching {
                    out.exit = CycleExit::Dropped(DropCause::Roulette);
                    return Ok(out);
                }
            }
            if verdicts.iter().any(|v| v.2 != aset.action) {
                let scores = self.cycle_scores(&aset.members, &state);
                let pick = roulette(&scores, select_rng).unwrap_or(0);
                let winner = verdicts[pick].2;
                for v in &verdicts {
                    if v.2 != winner {
                        out.removed.push(v.0);
                    }
                }
                verdicts.retain(|v| v.2 == winner);
                aset.members = verdicts.iter().map(|v| v.0).collect();
                aset.action = winner;
            }
            last = env.step(aset.action);
            ctx.t_total += 1;
            ctx.t_since_match += 1;
            out.continued_steps += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(StepRecord {
                    macro_step: ctx.macro_steps,
                    step: ctx.t_total,
                    true_state: env.true_state(),
                    sensed: state,
                    action: aset.action,
                    reward: last.reward,
                });
            }
        }
    }

    /// Delta-rule, error, fitness and set-size updates for every member of
    /// a set towards `target`, with predictions computed on `state`.
    pub fn update_set(&mut self, members: &[ClassifierId], target: f64, state: &[f64]) {
        let p = &self.params;
        let set_size: f64 = members.iter().filter_map(|id| self.population.get(*id)).map(|c| c.numerosity as f64).sum();
        let norm2 = p.x0 * p.x0 + state.iter().map(|s| s * s).sum::<f64>();
        for id in members {
            let Some(cl) = self.population.get_mut(*id) else { continue };
            let before = cl.prediction(state, p.x0);
            let step = p.eta / norm2 * (target - before);
            cl.weights[0] += step * p.x0;
            for (w, s) in cl.weights[1..].iter_mut().zip(state) {
                *w += step * s;
            }
            cl.error += p.beta * ((target - before).abs() - cl.error);
            cl.experience += 1;
            cl.action_set_size += p.beta * (set_size - cl.action_set_size);
        }
        let kappas: Vec<(ClassifierId, f64)> = members
            .iter()
            .filter_map(|id| self.population.get(*id))
            .map(|c| (c.id, accuracy(c.error, p) * c.numerosity as f64))
            .collect();
        let total: f64 = kappas.iter().map(|k| k.1).sum();
        if total <= 0.0 {
            return;
        }
        let beta = p.beta;
        for (id, k) in kappas {
            if let Some(cl) = self.population.get_mut(id) {
                cl.fitness += beta * (k / total - cl.fitness);
            }
        }
    }

    /// Numerosity-weighted mean GA timestamp of a set.
    pub fn mean_timestamp(&self, members: &[ClassifierId]) -> f64 {
        let (mut sum, mut num) = (0.0, 0.0);
        for cl in members.iter().filter_map(|id| self.population.get(*id)) {
            sum += cl.timestamp as f64 * cl.numerosity as f64;
            num += cl.numerosity as f64;
        }
        if num > 0.0 {
            sum / num
        } else {
            // an empty set never triggers the GA
            f64::INFINITY
        }
    }

    pub fn ga_due(&self, members: &[ClassifierId], trial: u64) -> bool {
        trial as f64 - self.mean_timestamp(members) > self.params.theta_ga
    }

    /// When the GA is due in this set, stamp every member and return true.
    pub fn maybe_trigger_ga(&mut self, members: &[ClassifierId], trial: u64) -> bool {
        if !self.ga_due(members, trial) {
            return false;
        }
        for id in members {
            if let Some(cl) = self.population.get_mut(*id) {
                cl.timestamp = trial;
            }
        }
        true
    }
}
