//! Steady-state niche GA over network genomes with self-adaptive rates.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::classifier::{Classifier, ClassifierId, SelfAdaptiveRates};
use crate::engine::subsumption::{behaviour, behaviour_subsumes, could_subsume};
use crate::engine::{roulette, Engine};
use crate::error::{Error, Result};
use crate::genome::{fmt_real, Genome};
use crate::mlp::{BIAS_RANGE, WEIGHT_RANGE};
use crate::spiking::Polarity;

/// Largest weight perturbation.
pub const WEIGHT_STEP: f64 = 0.1;
/// Chance that each legal site of a new neuron starts connected.
pub const NEW_NEURON_DENSITY: f64 = 0.5;

/// What one GA cycle did, for the optional event log.
#[derive(Clone, Debug, PartialEq)]
pub struct GaEvent {
    pub trial: u64,
    pub parents: [ClassifierId; 2],
    pub children: [String; 2],
    pub rates_before: [SelfAdaptiveRates; 2],
    pub rates_after: [SelfAdaptiveRates; 2],
    pub subsumed: [bool; 2],
}

impl GaEvent {
    pub fn to_record(&self) -> String {
        let rates = |r: &SelfAdaptiveRates| r.as_array().map(fmt_real).join(",");
        let mut fields = vec![format!("trial={}", self.trial)];
        for k in 0..2 {
            fields.push(format!(
                "parent{k}={} before{k}={} after{k}={} subsumed{k}={} child{k}={}",
                self.parents[k],
                rates(&self.rates_before[k]),
                rates(&self.rates_after[k]),
                self.subsumed[k],
                self.children[k]
            ));
        }
        fields.join(" ")
    }
}

/// Multiply each rate by `exp(N(0,1))` and clamp to `[rate_min, 1]`.
pub fn self_adapt<R: Rng + ?Sized>(rates: SelfAdaptiveRates, rate_min: f64, rng: &mut R) -> SelfAdaptiveRates {
    SelfAdaptiveRates::from_array(rates.as_array().map(|r| {
        let z: f64 = rng.sample(StandardNormal);
        adapt_rate(r, z, rate_min)
    }))
}

/// One rate update for a given normal draw.
pub fn adapt_rate(rate: f64, z: f64, rate_min: f64) -> f64 {
    (rate * z.exp()).clamp(rate_min, 1.0)
}

/// Perturb each weight (and perceptron bias) with probability `mu`.
pub fn mutate_weights<R: Rng + ?Sized>(genome: &mut Genome, mu: f64, rng: &mut R) {
    let mut perturb = |w: &mut f64, lo: f64, hi: f64| {
        if rng.random::<f64>() < mu {
            *w = (*w + rng.random_range(-WEIGHT_STEP..WEIGHT_STEP)).clamp(lo, hi);
        }
    };
    match genome {
        Genome::Spiking(n) => n.weights_mut().for_each(|w| perturb(w, 0.0, 1.0)),
        Genome::Mlp(n) => {
            n.weights_mut().for_each(|w| perturb(w, WEIGHT_RANGE.0, WEIGHT_RANGE.1));
            n.biases_mut().for_each(|b| perturb(b, BIAS_RANGE.0, BIAS_RANGE.1));
        }
    }
}

fn new_weight<R: Rng + ?Sized>(genome: &Genome, rng: &mut R) -> f64 {
    match genome {
        Genome::Spiking(_) => rng.random_range(0.0..=1.0),
        Genome::Mlp(_) => rng.random_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1),
    }
}

fn sites(genome: &Genome) -> Vec<(usize, usize)> {
    match genome {
        Genome::Spiking(n) => n.legal_sites(),
        Genome::Mlp(n) => n.legal_sites(),
    }
}

fn toggle(genome: &mut Genome, from: usize, to: usize, weight: f64) -> Result<()> {
    match genome {
        Genome::Spiking(n) => {
            if !n.remove_connection(from, to) {
                n.add_connection(from, to, weight)?;
            }
        }
        Genome::Mlp(n) => {
            if !n.remove_connection(from, to) {
                n.add_connection(from, to, weight)?;
            }
        }
    }
    Ok(())
}

/// Visit every legal site once and toggle it with probability `tau`.
pub fn mutate_connections<R: Rng + ?Sized>(genome: &mut Genome, tau: f64, rng: &mut R) -> Result<()> {
    for (from, to) in sites(genome) {
        if rng.random::<f64>() < tau {
            let w = new_weight(genome, rng);
            toggle(genome, from, to, w)?;
        }
    }
    Ok(())
}

/// With probability `psi`, add a hidden neuron (if a second draw falls
/// below `omega`) or remove a uniformly chosen one. The last hidden neuron
/// is never removed.
pub fn mutate_neurons<R: Rng + ?Sized>(genome: &mut Genome, psi: f64, omega: f64, rng: &mut R) -> Result<()> {
    if rng.random::<f64>() >= psi {
        return Ok(());
    }
    if rng.random::<f64>() < omega {
        let idx = match genome {
            Genome::Spiking(n) => n.add_hidden(Polarity::random(rng)),
            Genome::Mlp(n) => n.add_hidden(rng.random_range(BIAS_RANGE.0..=BIAS_RANGE.1)),
        };
        for (from, to) in sites(genome).into_iter().filter(|&(f, t)| f == idx || t == idx) {
            if rng.random_bool(NEW_NEURON_DENSITY) {
                let w = new_weight(genome, rng);
                toggle(genome, from, to, w)?;
            }
        }
    } else {
        let hidden = genome.hidden_count();
        if hidden > 1 {
            let j = rng.random_range(0..hidden);
            match genome {
                Genome::Spiking(n) => n.remove_hidden(j),
                Genome::Mlp(n) => n.remove_hidden(j),
            };
        }
    }
    Ok(())
}

/// Mutated clone of a parent: adapted rates first, then weights, neurons
/// and connections in that order.
pub fn make_child<R: Rng + ?Sized>(
    parent: &Classifier,
    id: ClassifierId,
    trial: u64,
    rate_min: f64,
    child_fitness_factor: f64,
    rng: &mut R,
) -> Result<Classifier> {
    let rates = self_adapt(parent.rates, rate_min, rng);
    let mut genome = parent.genome.clone();
    genome.reset_membranes();
    mutate_weights(&mut genome, rates.mu, rng);
    mutate_neurons(&mut genome, rates.psi, rates.omega, rng)?;
    mutate_connections(&mut genome, rates.tau, rng)?;
    let genome_hash = genome.genome_hash();
    Ok(Classifier {
        id,
        genome,
        genome_hash,
        weights: parent.weights.clone(),
        error: parent.error,
        fitness: parent.fitness * child_fitness_factor,
        numerosity: 1,
        experience: 0,
        timestamp: trial,
        action_set_size: parent.action_set_size,
        rates,
    })
}

/// One GA cycle in the set `members`: two parents by fitness roulette, two
/// mutated children, subsumption against both parents, then insertion.
/// Deletion avoids `protected` unless nothing else is left.
pub fn ga_cycle<R: Rng + ?Sized>(
    engine: &mut Engine,
    members: &[ClassifierId],
    protected: &[ClassifierId],
    trial: u64,
    rng: &mut R,
) -> Result<GaEvent> {
    let live: Vec<&Classifier> = members.iter().filter_map(|id| engine.population.get(*id)).collect();
    if live.is_empty() {
        return Err(Error::engine("GA invoked on an empty set"));
    }
    let fitness: Vec<f64> = live.iter().map(|c| c.fitness).collect();
    let pick = |rng: &mut R| roulette(&fitness, rng).unwrap_or_else(|| rng.random_range(0..fitness.len()));
    let parent_ids = [live[pick(rng)].id, live[pick(rng)].id];
    let params = engine.params.clone();

    let mut children = Vec::with_capacity(2);
    for pid in parent_ids {
        let parent = engine.population.get(pid).expect("parent is live").clone();
        let id = engine.population.allocate_id();
        children.push(make_child(&parent, id, trial, params.rate_min, params.child_fitness_factor, rng)?);
    }

    let decoder = engine.decoder;
    let mut parent_behaviour: Vec<Option<Vec<Option<usize>>>> = vec![None, None];
    let mut subsumed = [false, false];
    for (k, child) in children.iter().enumerate() {
        let mut child_behaviour = None;
        for (slot, pid) in parent_ids.iter().enumerate() {
            let parent = engine.population.get(*pid).expect("parent is live");
            if !could_subsume(parent, &params) {
                continue;
            }
            if parent_behaviour[slot].is_none() {
                parent_behaviour[slot] = Some(behaviour(&parent.genome, engine.probe_states(), &decoder)?);
            }
            if child_behaviour.is_none() {
                child_behaviour = Some(behaviour(&child.genome, engine.probe_states(), &decoder)?);
            }
            if behaviour_subsumes(parent_behaviour[slot].as_ref().unwrap(), child_behaviour.as_ref().unwrap()) {
                engine.population.get_mut(*pid).expect("parent is live").numerosity += 1;
                subsumed[k] = true;
                break;
            }
        }
    }

    let event = GaEvent {
        trial,
        parents: parent_ids,
        children: [children[0].genome.to_record(), children[1].genome.to_record()],
        rates_before: [
            engine.population.get(parent_ids[0]).expect("parent is live").rates,
            engine.population.get(parent_ids[1]).expect("parent is live").rates,
        ],
        rates_after: [children[0].rates, children[1].rates],
        subsumed,
    };
    let survivors: Vec<Classifier> = children.into_iter().zip(subsumed).filter(|(_, s)| !s).map(|(c, _)| c).collect();
    engine.population.insert_and_enforce_cap(survivors, &params, protected, rng);
    Ok(event)
}
