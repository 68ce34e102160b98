use rand::Rng;

use crate::genome::{fmt_real, Genome};

pub type ClassifierId = u64;

/// Per-classifier mutation rates, adapted as they pass to offspring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelfAdaptiveRates {
    /// Connection weight perturbation.
    pub mu: f64,
    /// Connection addition/removal.
    pub tau: f64,
    /// Neuron event.
    pub psi: f64,
    /// Neuron addition versus removal.
    pub omega: f64,
}

impl SelfAdaptiveRates {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, floor: f64) -> Self {
        let mut draw = || rng.random::<f64>().max(floor);
        SelfAdaptiveRates { mu: draw(), tau: draw(), psi: draw(), omega: draw() }
    }

    pub fn uniform(rate: f64) -> Self {
        SelfAdaptiveRates { mu: rate, tau: rate, psi: rate, omega: rate }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.mu, self.tau, self.psi, self.omega]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        SelfAdaptiveRates { mu: a[0], tau: a[1], psi: a[2], omega: a[3] }
    }
}

/// A macroclassifier: a network plus its linear payoff model and bookkeeping.
#[derive(Clone, Debug)]
pub struct Classifier {
    pub id: ClassifierId,
    pub genome: Genome,
    pub genome_hash: u64,
    /// Prediction weights; element 0 multiplies the constant `x0`.
    pub weights: Vec<f64>,
    pub error: f64,
    pub fitness: f64,
    pub numerosity: u32,
    pub experience: u64,
    pub timestamp: u64,
    pub action_set_size: f64,
    pub rates: SelfAdaptiveRates,
}

impl Classifier {
    pub fn new(
        id: ClassifierId,
        genome: Genome,
        rates: SelfAdaptiveRates,
        init: &InitialParams,
        timestamp: u64,
    ) -> Self {
        let weights = vec![0.0; genome.inputs() + 1];
        let genome_hash = genome.genome_hash();
        Classifier {
            id,
            genome,
            genome_hash,
            weights,
            error: init.error,
            fitness: init.fitness,
            numerosity: 1,
            experience: 0,
            timestamp,
            action_set_size: init.action_set_size,
            rates,
        }
    }

    /// Linear payoff estimate `w0 * x0 + sum_i w_i * s_i`.
    pub fn prediction(&self, state: &[f64], x0: f64) -> f64 {
        compute_prediction(&self.weights, state, x0)
    }

    pub fn refresh_hash(&mut self) {
        self.genome_hash = self.genome.genome_hash();
    }

    /// One line of a population snapshot.
    pub fn to_record(&self) -> String {
        let w: Vec<String> = self.weights.iter().map(|x| fmt_real(*x)).collect();
        let r: Vec<String> = self.rates.as_array().iter().map(|x| fmt_real(*x)).collect();
        format!(
            "id={} num={} exp={} ts={} err={} fit={} as={} w={} rates={} genome={}",
            self.id,
            self.numerosity,
            self.experience,
            self.timestamp,
            fmt_real(self.error),
            fmt_real(self.fitness),
            fmt_real(self.action_set_size),
            w.join(","),
            r.join(","),
            self.genome.to_record()
        )
    }
}

pub fn compute_prediction(weights: &[f64], state: &[f64], x0: f64) -> f64 {
    debug_assert_eq!(weights.len(), state.len() + 1);
    weights[0] * x0 + weights[1..].iter().zip(state).map(|(w, s)| w * s).sum::<f64>()
}

/// Parameter values given to newly covered classifiers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialParams {
    pub error: f64,
    pub fitness: f64,
    pub action_set_size: f64,
}

impl Default for InitialParams {
    fn default() -> Self {
        InitialParams { error: 0.01, fitness: 0.01, action_set_size: 1.0 }
    }
}
