//! Discrete-time leaky integrate-and-fire networks.
//!
//! Neurons are stored in a fixed layout: the input layer first, then the three
//! output neurons, then the hidden layer. Growing or shrinking the hidden layer
//! therefore never moves an input or output neuron.
//!
//! Each network step updates every membrane synchronously from the spike flags
//! of the previous step:
//!
//! ```text
//! m(t+1) = m(t) + (I + a - b * m(t)),   a = 0.3, b = 0.05
//! if m(t+1) > 1.0 { spike; m(t+1) = 0.0 }
//! ```
//!
//! Input neurons receive their scaled state component as `I`; all other
//! neurons receive the signed sum of the weights of incoming connections whose
//! presynaptic neuron fired on the previous step. Inhibitory neurons deliver
//! `-weight`. The membrane is floored at zero.

use std::hash::{Hash, Hasher};

use rand::Rng;

use crate::error::{Error, Result};
use crate::genome::{Decision, Level};

/// Excitation constant `a`.
pub const EXCITATION: f64 = 0.3;
/// Leak constant `b`.
pub const LEAK: f64 = 0.05;
/// Post-spike reset potential `c`.
pub const RESET_POTENTIAL: f64 = 0.0;
/// Firing threshold.
pub const THRESHOLD: f64 = 1.0;
/// Network steps run per state presentation.
pub const WINDOW_STEPS: usize = 5;
/// Spikes within one window needed for a high activation.
pub const HIGH_SPIKES: u8 = 3;
/// Output neurons: two action bits and the don't-match neuron.
pub const OUTPUTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NeuronKind {
    Input,
    Hidden,
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Excitatory,
    Inhibitory,
}

impl Polarity {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Polarity::Excitatory
        } else {
            Polarity::Inhibitory
        }
    }

    fn sign(self) -> f64 {
        match self {
            Polarity::Excitatory => 1.0,
            Polarity::Inhibitory => -1.0,
        }
    }
}

/// A read-only view of one neuron.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neuron {
    pub kind: NeuronKind,
    pub polarity: Polarity,
    pub membrane: f64,
    pub fired_this_step: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Connection {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Returns whether a directed connection between the two kinds is allowed.
pub fn legal_site(from: NeuronKind, to: NeuronKind) -> bool {
    matches!(
        (from, to),
        (NeuronKind::Input, NeuronKind::Hidden)
            | (NeuronKind::Hidden, NeuronKind::Hidden)
            | (NeuronKind::Hidden, NeuronKind::Output)
    )
}

#[derive(Clone, Debug)]
pub struct SpikingNetwork {
    inputs: usize,
    polarity: Vec<Polarity>,
    /// Sorted by `(from, to)`, at most one per site.
    connections: Vec<Connection>,
    membrane: Vec<f64>,
    fired: Vec<bool>,
    drive: Vec<f64>,
}

impl SpikingNetwork {
    /// A network without connections. Hidden polarities are given in order.
    pub fn new(inputs: usize, hidden: &[Polarity]) -> Result<Self> {
        if inputs == 0 {
            return Err(Error::config("a network needs at least one input"));
        }
        if hidden.is_empty() {
            return Err(Error::config("the hidden layer may not be empty"));
        }
        let mut polarity = vec![Polarity::Excitatory; inputs + OUTPUTS];
        polarity.extend_from_slice(hidden);
        let n = polarity.len();
        Ok(SpikingNetwork {
            inputs,
            polarity,
            connections: Vec::new(),
            membrane: vec![0.0; n],
            fired: vec![false; n],
            drive: vec![0.0; n],
        })
    }

    /// Random network: hidden polarities are a fair coin, every legal site is
    /// occupied with probability `density`, weights are uniform in `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(inputs: usize, hidden: usize, density: f64, rng: &mut R) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::config("the hidden layer may not be empty"));
        }
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::config(format!("connection density {density} outside [0, 1]")));
        }
        let polarities: Vec<Polarity> = (0..hidden).map(|_| Polarity::random(rng)).collect();
        let mut net = SpikingNetwork::new(inputs, &polarities)?;
        for (from, to) in net.legal_sites() {
            if rng.random::<f64>() < density {
                let weight = rng.random::<f64>();
                net.connections.push(Connection { from, to, weight });
            }
        }
        Ok(net)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden_count(&self) -> usize {
        self.polarity.len() - self.inputs - OUTPUTS
    }

    pub fn neuron_count(&self) -> usize {
        self.polarity.len()
    }

    pub fn output_index(&self, k: usize) -> usize {
        self.inputs + k
    }

    pub fn hidden_index(&self, j: usize) -> usize {
        self.inputs + OUTPUTS + j
    }

    pub fn kind(&self, idx: usize) -> NeuronKind {
        if idx < self.inputs {
            NeuronKind::Input
        } else if idx < self.inputs + OUTPUTS {
            NeuronKind::Output
        } else {
            NeuronKind::Hidden
        }
    }

    pub fn neuron(&self, idx: usize) -> Neuron {
        Neuron {
            kind: self.kind(idx),
            polarity: self.polarity[idx],
            membrane: self.membrane[idx],
            fired_this_step: self.fired[idx],
        }
    }

    pub fn polarities(&self) -> &[Polarity] {
        &self.polarity
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn membranes(&self) -> &[f64] {
        &self.membrane
    }

    pub fn set_membrane(&mut self, idx: usize, value: f64) {
        self.membrane[idx] = value;
    }

    /// All legal `(from, to)` sites in canonical order.
    pub fn legal_sites(&self) -> Vec<(usize, usize)> {
        let hidden: Vec<usize> = (0..self.hidden_count()).map(|j| self.hidden_index(j)).collect();
        let mut sites = Vec::with_capacity(self.inputs * hidden.len() + hidden.len() * (hidden.len() + OUTPUTS));
        for i in 0..self.inputs {
            for &h in &hidden {
                sites.push((i, h));
            }
        }
        for k in 0..OUTPUTS {
            for &h in &hidden {
                sites.push((h, self.output_index(k)));
            }
        }
        for &h in &hidden {
            for &g in &hidden {
                sites.push((h, g));
            }
        }
        sites.sort_unstable();
        sites
    }

    pub fn legal_site_count(&self) -> usize {
        let h = self.hidden_count();
        self.inputs * h + h * h + h * OUTPUTS
    }

    fn find(&self, from: usize, to: usize) -> std::result::Result<usize, usize> {
        self.connections.binary_search_by(|c| (c.from, c.to).cmp(&(from, to)))
    }

    pub fn has_connection(&self, from: usize, to: usize) -> bool {
        self.find(from, to).is_ok()
    }

    /// Add a connection, enforcing the layer rule and the weight range.
    pub fn add_connection(&mut self, from: usize, to: usize, weight: f64) -> Result<()> {
        let n = self.neuron_count();
        if from >= n || to >= n || !legal_site(self.kind(from), self.kind(to)) {
            return Err(Error::config(format!("illegal connection site {from}->{to}")));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::config(format!("spiking weight {weight} outside [0, 1]")));
        }
        match self.find(from, to) {
            Ok(_) => Err(Error::config(format!("site {from}->{to} already occupied"))),
            Err(pos) => {
                self.connections.insert(pos, Connection { from, to, weight });
                Ok(())
            }
        }
    }

    pub fn remove_connection(&mut self, from: usize, to: usize) -> bool {
        match self.find(from, to) {
            Ok(pos) => {
                self.connections.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub(crate) fn weights_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.connections.iter_mut().map(|c| &mut c.weight)
    }

    /// Append a hidden neuron and return its index.
    pub fn add_hidden(&mut self, polarity: Polarity) -> usize {
        self.polarity.push(polarity);
        self.membrane.push(0.0);
        self.fired.push(false);
        self.drive.push(0.0);
        self.polarity.len() - 1
    }

    /// Remove hidden neuron `j` and every connection touching it. The last
    /// hidden neuron is never removed.
    pub fn remove_hidden(&mut self, j: usize) -> bool {
        if self.hidden_count() <= 1 || j >= self.hidden_count() {
            return false;
        }
        let idx = self.hidden_index(j);
        self.polarity.remove(idx);
        self.membrane.remove(idx);
        self.fired.remove(idx);
        self.drive.remove(idx);
        self.connections.retain(|c| c.from != idx && c.to != idx);
        for c in &mut self.connections {
            if c.from > idx {
                c.from -= 1;
            }
            if c.to > idx {
                c.to -= 1;
            }
        }
        // Shifting indices preserves the (from, to) ordering.
        true
    }

    /// Zero every membrane and clear the spike flags.
    pub fn reset_membranes(&mut self) {
        self.membrane.iter_mut().for_each(|m| *m = 0.0);
        self.fired.iter_mut().for_each(|f| *f = false);
    }

    /// Advance the network by one step and return the new spike flags.
    pub fn step(&mut self, input: &[f64]) -> Result<&[bool]> {
        if input.len() != self.inputs {
            return Err(Error::config(format!("network expects {} inputs, got {}", self.inputs, input.len())));
        }
        self.step_unchecked(input);
        Ok(&self.fired)
    }

    fn step_unchecked(&mut self, input: &[f64]) {
        self.drive.iter_mut().for_each(|d| *d = 0.0);
        self.drive[..self.inputs].copy_from_slice(input);
        for c in &self.connections {
            if self.fired[c.from] {
                self.drive[c.to] += self.polarity[c.from].sign() * c.weight;
            }
        }
        for ((m, fired), &drive) in self.membrane.iter_mut().zip(self.fired.iter_mut()).zip(&self.drive) {
            let mut next = *m + (drive + EXCITATION - LEAK * *m);
            if next < 0.0 {
                next = 0.0;
            }
            if next > THRESHOLD {
                *fired = true;
                next = RESET_POTENTIAL;
            } else {
                *fired = false;
            }
            *m = next;
        }
    }

    /// Run one presentation window and count spikes at each output.
    /// Membranes are not reset first.
    pub fn window_spikes(&mut self, state: &[f64]) -> Result<[u8; OUTPUTS]> {
        if state.len() != self.inputs {
            return Err(Error::config(format!("network expects {} inputs, got {}", self.inputs, state.len())));
        }
        let mut counts = [0u8; OUTPUTS];
        for _ in 0..WINDOW_STEPS {
            self.step_unchecked(state);
            for (k, count) in counts.iter_mut().enumerate() {
                if self.fired[self.inputs + k] {
                    *count += 1;
                }
            }
        }
        Ok(counts)
    }

    /// Present a scaled state: match flag from the don't-match neuron, action
    /// bits from the first two outputs.
    pub fn evaluate(&mut self, state: &[f64]) -> Result<Decision> {
        let counts = self.window_spikes(state)?;
        let level = |c: u8| if c >= HIGH_SPIKES { Level::High } else { Level::Low };
        Ok(Decision { matches: level(counts[2]) == Level::Low, action_bits: [level(counts[0]), level(counts[1])] })
    }

    /// Hidden neurons with at least one connection.
    pub fn connected_hidden(&self) -> usize {
        (0..self.hidden_count())
            .filter(|&j| {
                let idx = self.hidden_index(j);
                self.connections.iter().any(|c| c.from == idx || c.to == idx)
            })
            .count()
    }

    pub(crate) fn genome_eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs
            && self.polarity == other.polarity
            && self.connections.len() == other.connections.len()
            && self
                .connections
                .iter()
                .zip(&other.connections)
                .all(|(a, b)| a.from == b.from && a.to == b.to && a.weight.to_bits() == b.weight.to_bits())
    }

    pub(crate) fn hash_genome<H: Hasher>(&self, state: &mut H) {
        self.inputs.hash(state);
        self.polarity.hash(state);
        for c in &self.connections {
            (c.from, c.to, c.weight.to_bits()).hash(state);
        }
    }

    pub(crate) fn from_parts(inputs: usize, polarity: Vec<Polarity>, connections: Vec<Connection>) -> Result<Self> {
        if polarity.len() <= inputs + OUTPUTS {
            return Err(Error::config("the hidden layer may not be empty"));
        }
        let hidden = &polarity[inputs + OUTPUTS..];
        let mut net = SpikingNetwork::new(inputs, hidden)?;
        if polarity[..inputs + OUTPUTS].iter().any(|p| *p != Polarity::Excitatory) {
            return Err(Error::config("input and output neurons must be excitatory"));
        }
        for c in connections {
            net.add_connection(c.from, c.to, c.weight)?;
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    fn isolated(m0: f64, input: f64) -> f64 {
        let mut net = SpikingNetwork::new(1, &[Polarity::Excitatory]).unwrap();
        net.set_membrane(0, m0);
        net.step(&[input]).unwrap();
        net.membranes()[0]
    }

    #[test]
    fn single_step_from_rest() {
        assert!((isolated(0.0, 0.0) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn three_steps_without_input_stay_below_threshold() {
        let mut net = SpikingNetwork::new(1, &[Polarity::Excitatory]).unwrap();
        let expected = [0.3, 0.585, 0.855_75];
        for want in expected {
            let fired = net.step(&[0.0]).unwrap()[0];
            assert!(!fired);
            assert!((net.membranes()[0] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn crossing_threshold_spikes_and_resets() {
        let mut net = SpikingNetwork::new(1, &[Polarity::Excitatory]).unwrap();
        net.set_membrane(0, 0.9);
        // 0.9 + (0.5 + 0.3 - 0.045) = 1.655
        assert!(net.step(&[0.5]).unwrap()[0]);
        assert_eq!(net.membranes()[0], 0.0);
    }

    #[test]
    fn inhibitory_spike_subtracts_and_floors_at_zero() {
        let mut net = SpikingNetwork::new(1, &[Polarity::Inhibitory, Polarity::Excitatory]).unwrap();
        let (h0, h1) = (net.hidden_index(0), net.hidden_index(1));
        net.add_connection(h0, h1, 1.0).unwrap();
        net.set_membrane(h0, 0.95);
        net.step(&[0.0]).unwrap();
        assert!(net.neuron(h0).fired_this_step);
        net.set_membrane(h1, 0.2);
        net.step(&[0.0]).unwrap();
        // 0.2 + (-1.0 + 0.3 - 0.01) < 0
        assert_eq!(net.membranes()[h1], 0.0);
    }

    #[test]
    fn no_connections_means_match_with_low_bits() {
        let mut net = SpikingNetwork::new(2, &[Polarity::Excitatory]).unwrap();
        let d = net.evaluate(&[0.9, 0.1]).unwrap();
        assert!(d.matches);
        assert_eq!(d.action_bits, [Level::Low, Level::Low]);
    }

    #[test]
    fn dont_match_neuron_firing_three_times_excludes() {
        // A strongly driven hidden neuron with a self loop keeps the
        // don't-match output firing.
        let mut net = SpikingNetwork::new(1, &[Polarity::Excitatory]).unwrap();
        let h = net.hidden_index(0);
        net.add_connection(0, h, 1.0).unwrap();
        net.add_connection(h, h, 1.0).unwrap();
        net.add_connection(h, net.output_index(2), 1.0).unwrap();
        net.set_membrane(0, 0.9);
        net.set_membrane(h, 0.9);
        net.set_membrane(net.output_index(2), 0.9);
        let counts = net.window_spikes(&[1.0]).unwrap();
        assert!(counts[2] >= HIGH_SPIKES);
        net.set_membrane(0, 0.9);
        assert!(!net.evaluate(&[1.0]).unwrap().matches);
    }

    #[test]
    fn reset_clears_state_and_is_idempotent() {
        let mut net = SpikingNetwork::random(2, 1, 1.0, &mut derive_stream(1, "t")).unwrap();
        net.set_membrane(0, 0.4);
        net.set_membrane(1, 0.9);
        net.reset_membranes();
        let once = net.membranes().to_vec();
        net.reset_membranes();
        assert_eq!(once, net.membranes());
        assert!(once.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn random_full_density_occupies_every_site() {
        let net = SpikingNetwork::random(2, 1, 1.0, &mut derive_stream(2, "t")).unwrap();
        assert_eq!(net.connections().len(), 6);
        assert!(net.connections().iter().all(|c| (0.0..=1.0).contains(&c.weight)));
    }

    #[test]
    fn zero_hidden_is_rejected() {
        assert!(SpikingNetwork::random(2, 0, 1.0, &mut derive_stream(2, "t")).is_err());
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let mut net = SpikingNetwork::new(2, &[Polarity::Excitatory]).unwrap();
        assert!(matches!(net.step(&[0.1]), Err(Error::Config(_))));
        assert!(net.evaluate(&[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn illegal_sites_are_refused() {
        let mut net = SpikingNetwork::new(2, &[Polarity::Excitatory]).unwrap();
        let (h, o) = (net.hidden_index(0), net.output_index(0));
        assert!(net.add_connection(o, h, 0.5).is_err());
        assert!(net.add_connection(h, 0, 0.5).is_err());
        assert!(net.add_connection(0, o, 0.5).is_err());
        assert!(net.add_connection(0, h, 1.5).is_err());
        net.add_connection(0, h, 0.5).unwrap();
        assert!(net.add_connection(0, h, 0.5).is_err());
    }

    #[test]
    fn removing_hidden_reindexes_connections() {
        let mut net = SpikingNetwork::new(1, &[Polarity::Excitatory, Polarity::Inhibitory]).unwrap();
        let (h0, h1) = (net.hidden_index(0), net.hidden_index(1));
        net.add_connection(0, h0, 0.1).unwrap();
        net.add_connection(0, h1, 0.2).unwrap();
        net.add_connection(h1, net.output_index(1), 0.3).unwrap();
        assert!(net.remove_hidden(0));
        assert_eq!(net.hidden_count(), 1);
        let h = net.hidden_index(0);
        assert_eq!(net.polarities()[h], Polarity::Inhibitory);
        assert!(net.has_connection(0, h));
        assert!(net.has_connection(h, net.output_index(1)));
        assert_eq!(net.connections().len(), 2);
        assert!(!net.remove_hidden(0));
    }
}
