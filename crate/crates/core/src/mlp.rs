//! Feedforward perceptron classifiers, the stateless baseline.
//!
//! Same neuron layout as the spiking networks (inputs, three outputs, hidden)
//! but connections only run input to hidden and hidden to output. Hidden and
//! output units apply a logistic sigmoid to their weighted sum plus bias; an
//! output of 0.5 or more reads as high.

use std::hash::{Hash, Hasher};

use rand::Rng;

use crate::error::{Error, Result};
use crate::genome::{Decision, Level};
use crate::spiking::{Connection, NeuronKind, OUTPUTS};

pub const WEIGHT_RANGE: (f64, f64) = (-1.0, 1.0);
pub const BIAS_RANGE: (f64, f64) = (0.0, 1.0);

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn legal_site(from: NeuronKind, to: NeuronKind) -> bool {
    matches!((from, to), (NeuronKind::Input, NeuronKind::Hidden) | (NeuronKind::Hidden, NeuronKind::Output))
}

#[derive(Clone, Debug)]
pub struct MlpNetwork {
    inputs: usize,
    /// One bias per neuron; input biases are unused and kept at zero.
    bias: Vec<f64>,
    connections: Vec<Connection>,
}

impl MlpNetwork {
    pub fn new(inputs: usize, hidden_biases: &[f64]) -> Result<Self> {
        if inputs == 0 {
            return Err(Error::config("a network needs at least one input"));
        }
        if hidden_biases.is_empty() {
            return Err(Error::config("the hidden layer may not be empty"));
        }
        let mut bias = vec![0.0; inputs + OUTPUTS];
        bias.extend_from_slice(hidden_biases);
        Ok(MlpNetwork { inputs, bias, connections: Vec::new() })
    }

    pub fn random<R: Rng + ?Sized>(inputs: usize, hidden: usize, density: f64, rng: &mut R) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::config("the hidden layer may not be empty"));
        }
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::config(format!("connection density {density} outside [0, 1]")));
        }
        let hidden_biases: Vec<f64> = (0..hidden).map(|_| rng.random::<f64>()).collect();
        let mut net = MlpNetwork::new(inputs, &hidden_biases)?;
        for k in 0..OUTPUTS {
            net.bias[inputs + k] = rng.random::<f64>();
        }
        for (from, to) in net.legal_sites() {
            if rng.random::<f64>() < density {
                let weight = rng.random_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1);
                net.connections.push(Connection { from, to, weight });
            }
        }
        Ok(net)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden_count(&self) -> usize {
        self.bias.len() - self.inputs - OUTPUTS
    }

    pub fn neuron_count(&self) -> usize {
        self.bias.len()
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

    pub fn biases(&self) -> &[f64] {
        &self.bias
    }

    pub fn set_bias(&mut self, idx: usize, value: f64) -> Result<()> {
        if self.kind(idx) == NeuronKind::Input || !(BIAS_RANGE.0..=BIAS_RANGE.1).contains(&value) {
            return Err(Error::config(format!("invalid bias {value} for neuron {idx}")));
        }
        self.bias[idx] = value;
        Ok(())
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn legal_sites(&self) -> Vec<(usize, usize)> {
        let mut sites = Vec::with_capacity(self.legal_site_count());
        for j in 0..self.hidden_count() {
            let h = self.hidden_index(j);
            for i in 0..self.inputs {
                sites.push((i, h));
            }
            for k in 0..OUTPUTS {
                sites.push((h, self.output_index(k)));
            }
        }
        sites.sort_unstable();
        sites
    }

    pub fn legal_site_count(&self) -> usize {
        self.hidden_count() * (self.inputs + OUTPUTS)
    }

    fn find(&self, from: usize, to: usize) -> std::result::Result<usize, usize> {
        self.connections.binary_search_by(|c| (c.from, c.to).cmp(&(from, to)))
    }

    pub fn has_connection(&self, from: usize, to: usize) -> bool {
        self.find(from, to).is_ok()
    }

    pub fn add_connection(&mut self, from: usize, to: usize, weight: f64) -> Result<()> {
        let n = self.neuron_count();
        if from >= n || to >= n || !legal_site(self.kind(from), self.kind(to)) {
            return Err(Error::config(format!("illegal connection site {from}->{to}")));
        }
        if !(WEIGHT_RANGE.0..=WEIGHT_RANGE.1).contains(&weight) {
            return Err(Error::config(format!("mlp weight {weight} outside [-1, 1]")));
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

    pub(crate) fn biases_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        let skip = self.inputs;
        self.bias.iter_mut().skip(skip)
    }

    pub fn add_hidden(&mut self, bias: f64) -> usize {
        self.bias.push(bias);
        self.bias.len() - 1
    }

    pub fn remove_hidden(&mut self, j: usize) -> bool {
        if self.hidden_count() <= 1 || j >= self.hidden_count() {
            return false;
        }
        let idx = self.hidden_index(j);
        self.bias.remove(idx);
        self.connections.retain(|c| c.from != idx && c.to != idx);
        for c in &mut self.connections {
            if c.from > idx {
                c.from -= 1;
            }
            if c.to > idx {
                c.to -= 1;
            }
        }
        true
    }

    /// Raw output activations for one feedforward pass.
    pub fn outputs(&self, state: &[f64]) -> Result<[f64; OUTPUTS]> {
        if state.len() != self.inputs {
            return Err(Error::config(format!("network expects {} inputs, got {}", self.inputs, state.len())));
        }
        let mut sum = self.bias.clone();
        sum[..self.inputs].copy_from_slice(state);
        // Connections are sorted by source and inputs precede hidden units,
        // but hidden units are indexed after outputs, so do two passes.
        for c in self.connections.iter().filter(|c| c.from < self.inputs) {
            sum[c.to] += c.weight * state[c.from];
        }
        let hidden_start = self.inputs + OUTPUTS;
        for h in hidden_start..sum.len() {
            sum[h] = sigmoid(sum[h]);
        }
        for c in self.connections.iter().filter(|c| c.from >= hidden_start) {
            sum[c.to] += c.weight * sum[c.from];
        }
        let mut out = [0.0; OUTPUTS];
        for (k, o) in out.iter_mut().enumerate() {
            *o = sigmoid(sum[self.inputs + k]);
        }
        Ok(out)
    }

    pub fn evaluate(&self, state: &[f64]) -> Result<Decision> {
        let out = self.outputs(state)?;
        let level = |x: f64| if x < 0.5 { Level::Low } else { Level::High };
        Ok(Decision { matches: level(out[2]) == Level::Low, action_bits: [level(out[0]), level(out[1])] })
    }

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
            && self.bias.len() == other.bias.len()
            && self.bias.iter().zip(&other.bias).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.connections.len() == other.connections.len()
            && self
                .connections
                .iter()
                .zip(&other.connections)
                .all(|(a, b)| a.from == b.from && a.to == b.to && a.weight.to_bits() == b.weight.to_bits())
    }

    pub(crate) fn hash_genome<H: Hasher>(&self, state: &mut H) {
        self.inputs.hash(state);
        for b in &self.bias {
            b.to_bits().hash(state);
        }
        for c in &self.connections {
            (c.from, c.to, c.weight.to_bits()).hash(state);
        }
    }

    pub(crate) fn from_parts(inputs: usize, bias: Vec<f64>, connections: Vec<Connection>) -> Result<Self> {
        if bias.len() <= inputs + OUTPUTS {
            return Err(Error::config("the hidden layer may not be empty"));
        }
        let mut net = MlpNetwork::new(inputs, &bias[inputs + OUTPUTS..])?;
        for (idx, &b) in bias.iter().enumerate().skip(inputs) {
            net.set_bias(idx, b)?;
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

    #[test]
    fn all_zero_network_outputs_one_half_and_reads_high() {
        let mut net = MlpNetwork::new(2, &[0.0]).unwrap();
        let h = net.hidden_index(0);
        for k in 0..OUTPUTS {
            net.add_connection(h, net.output_index(k), 0.0).unwrap();
        }
        net.add_connection(0, h, 0.0).unwrap();
        let out = net.outputs(&[0.3, 0.7]).unwrap();
        assert!(out.iter().all(|&o| o == 0.5));
        let d = net.evaluate(&[0.3, 0.7]).unwrap();
        assert!(!d.matches);
        assert_eq!(d.action_bits, [Level::High, Level::High]);
    }

    #[test]
    fn negative_path_to_dont_match_output_matches() {
        let mut net = MlpNetwork::new(1, &[1.0]).unwrap();
        let h = net.hidden_index(0);
        net.add_connection(h, net.output_index(2), -1.0).unwrap();
        // hidden = sigmoid(1) ~ 0.731, output 3 = sigmoid(-0.731) < 0.5
        let out = net.outputs(&[0.0]).unwrap();
        assert!((out[2] - sigmoid(-sigmoid(1.0))).abs() < 1e-12);
        assert!(net.evaluate(&[0.0]).unwrap().matches);
    }

    #[test]
    fn evaluation_is_stateless() {
        let net = MlpNetwork::random(2, 3, 1.0, &mut derive_stream(4, "m")).unwrap();
        let a = net.outputs(&[0.2, 0.9]).unwrap();
        let b = net.outputs(&[0.2, 0.9]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_respects_ranges_and_topology() {
        let net = MlpNetwork::random(2, 2, 1.0, &mut derive_stream(5, "m")).unwrap();
        assert_eq!(net.connections().len(), 2 * (2 + 3));
        assert!(net.connections().iter().all(|c| (-1.0..=1.0).contains(&c.weight)));
        assert!(net.biases()[2..].iter().all(|b| (0.0..=1.0).contains(b)));
        for c in net.connections() {
            assert!(legal_site(net.kind(c.from), net.kind(c.to)));
        }
    }

    #[test]
    fn recurrent_sites_are_illegal() {
        let mut net = MlpNetwork::new(1, &[0.5, 0.5]).unwrap();
        let (h0, h1) = (net.hidden_index(0), net.hidden_index(1));
        assert!(net.add_connection(h0, h1, 0.1).is_err());
        assert!(net.add_connection(h0, h0, 0.1).is_err());
        assert!(net.set_bias(h0, 1.5).is_err());
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let net = MlpNetwork::new(2, &[0.5]).unwrap();
        assert!(matches!(net.evaluate(&[0.5]), Err(Error::Config(_))));
    }
}
