//! The classifier network, either spiking or perceptron, behind one type.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mlp::MlpNetwork;
use crate::spiking::{Connection, NeuronKind, Polarity, SpikingNetwork};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Low,
    High,
}

/// What a network says about one state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Decision {
    pub matches: bool,
    pub action_bits: [Level; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    Spiking,
    Mlp,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Spiking => "spiking",
            Representation::Mlp => "mlp",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiking" => Ok(Representation::Spiking),
            "mlp" => Ok(Representation::Mlp),
            other => Err(Error::config(format!("unknown representation `{other}`"))),
        }
    }
}

/// How fresh networks are built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkSpec {
    pub representation: Representation,
    pub inputs: usize,
    pub hidden: usize,
    pub density: f64,
}

#[derive(Clone, Debug)]
pub enum Genome {
    Spiking(SpikingNetwork),
    Mlp(MlpNetwork),
}

impl Genome {
    pub fn random<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<Self> {
        Ok(match spec.representation {
            Representation::Spiking => {
                Genome::Spiking(SpikingNetwork::random(spec.inputs, spec.hidden, spec.density, rng)?)
            }
            Representation::Mlp => Genome::Mlp(MlpNetwork::random(spec.inputs, spec.hidden, spec.density, rng)?),
        })
    }

    pub fn representation(&self) -> Representation {
        match self {
            Genome::Spiking(_) => Representation::Spiking,
            Genome::Mlp(_) => Representation::Mlp,
        }
    }

    pub fn evaluate(&mut self, state: &[f64]) -> Result<Decision> {
        match self {
            Genome::Spiking(n) => n.evaluate(state),
            Genome::Mlp(n) => n.evaluate(state),
        }
    }

    pub fn reset_membranes(&mut self) {
        if let Genome::Spiking(n) = self {
            n.reset_membranes();
        }
    }

    pub fn inputs(&self) -> usize {
        match self {
            Genome::Spiking(n) => n.inputs(),
            Genome::Mlp(n) => n.inputs(),
        }
    }

    pub fn hidden_count(&self) -> usize {
        match self {
            Genome::Spiking(n) => n.hidden_count(),
            Genome::Mlp(n) => n.hidden_count(),
        }
    }

    pub fn connected_hidden(&self) -> usize {
        match self {
            Genome::Spiking(n) => n.connected_hidden(),
            Genome::Mlp(n) => n.connected_hidden(),
        }
    }

    pub fn connection_count(&self) -> usize {
        match self {
            Genome::Spiking(n) => n.connections().len(),
            Genome::Mlp(n) => n.connections().len(),
        }
    }

    pub fn legal_site_count(&self) -> usize {
        match self {
            Genome::Spiking(n) => n.legal_site_count(),
            Genome::Mlp(n) => n.legal_site_count(),
        }
    }

    /// Fraction of legal sites that hold a connection.
    pub fn connectivity(&self) -> f64 {
        let sites = self.legal_site_count();
        if sites == 0 {
            0.0
        } else {
            self.connection_count() as f64 / sites as f64
        }
    }

    pub fn connections(&self) -> &[Connection] {
        match self {
            Genome::Spiking(n) => n.connections(),
            Genome::Mlp(n) => n.connections(),
        }
    }

    /// Exact structural and weight equality (membranes ignored).
    pub fn same_genome(&self, other: &Genome) -> bool {
        match (self, other) {
            (Genome::Spiking(a), Genome::Spiking(b)) => a.genome_eq(b),
            (Genome::Mlp(a), Genome::Mlp(b)) => a.genome_eq(b),
            _ => false,
        }
    }

    pub fn genome_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        match self {
            Genome::Spiking(n) => {
                0u8.hash(&mut h);
                n.hash_genome(&mut h);
            }
            Genome::Mlp(n) => {
                1u8.hash(&mut h);
                n.hash_genome(&mut h);
            }
        }
        h.finish()
    }

    /// Flat text record: `tag|n=<neurons>|c=<from,to,weight;...>`.
    ///
    /// Spiking neurons are written as kind letter plus polarity letter
    /// (`iE`, `hI`, ...); perceptron neurons as kind letter plus bias
    /// (`h:5.0000000000000000e-1`). Reals carry 17 significant digits.
    pub fn to_record(&self) -> String {
        let kind_letter = |k: NeuronKind| match k {
            NeuronKind::Input => 'i',
            NeuronKind::Hidden => 'h',
            NeuronKind::Output => 'o',
        };
        let (tag, neurons, conns) = match self {
            Genome::Spiking(n) => {
                let neurons: Vec<String> = n
                    .polarities()
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let pol = match p {
                            Polarity::Excitatory => 'E',
                            Polarity::Inhibitory => 'I',
                        };
                        format!("{}{}", kind_letter(n.kind(i)), pol)
                    })
                    .collect();
                ("spiking", neurons, n.connections())
            }
            Genome::Mlp(n) => {
                let neurons: Vec<String> = n
                    .biases()
                    .iter()
                    .enumerate()
                    .map(|(i, b)| format!("{}:{}", kind_letter(n.kind(i)), fmt_real(*b)))
                    .collect();
                ("mlp", neurons, n.connections())
            }
        };
        let conns: Vec<String> = conns.iter().map(|c| format!("{},{},{}", c.from, c.to, fmt_real(c.weight))).collect();
        format!("{tag}|n={}|c={}", neurons.join(","), conns.join(";"))
    }

    pub fn from_record(record: &str) -> Result<Self> {
        let bad = |msg: &str| Error::config(format!("bad genome record ({msg}): {record}"));
        let mut parts = record.split('|');
        let tag = parts.next().ok_or_else(|| bad("missing tag"))?;
        let neurons = parts.next().and_then(|p| p.strip_prefix("n=")).ok_or_else(|| bad("missing neurons"))?;
        let conns = parts.next().and_then(|p| p.strip_prefix("c=")).ok_or_else(|| bad("missing connections"))?;
        let mut connections = Vec::new();
        for triple in conns.split(';').filter(|s| !s.is_empty()) {
            let f: Vec<&str> = triple.split(',').collect();
            if f.len() != 3 {
                return Err(bad("connection triple"));
            }
            connections.push(Connection {
                from: f[0].parse().map_err(|_| bad("from"))?,
                to: f[1].parse().map_err(|_| bad("to"))?,
                weight: f[2].parse().map_err(|_| bad("weight"))?,
            });
        }
        let neurons: Vec<&str> = neurons.split(',').collect();
        let inputs = neurons.iter().take_while(|n| n.starts_with('i')).count();
        match tag {
            "spiking" => {
                let polarity = neurons
                    .iter()
                    .map(|n| match n.chars().nth(1) {
                        Some('E') => Ok(Polarity::Excitatory),
                        Some('I') => Ok(Polarity::Inhibitory),
                        _ => Err(bad("polarity")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Genome::Spiking(SpikingNetwork::from_parts(inputs, polarity, connections)?))
            }
            "mlp" => {
                let bias = neurons
                    .iter()
                    .map(|n| n.split_once(':').and_then(|(_, b)| b.parse::<f64>().ok()).ok_or_else(|| bad("bias")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Genome::Mlp(MlpNetwork::from_parts(inputs, bias, connections)?))
            }
            _ => Err(bad("unknown tag")),
        }
    }
}

/// Shortest-exact scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}
