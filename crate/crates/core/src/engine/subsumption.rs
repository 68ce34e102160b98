//! Behavioural subsumption of GA offspring over a fixed set of probe states.

use super::EngineParams;
use crate::classifier::Classifier;
use crate::env::ActionDecoder;
use crate::error::Result;
use crate::genome::Genome;

/// Points per dimension of the probe lattice.
pub const LATTICE_POINTS: usize = 10;
/// Lattices above this dimension are replaced by a Halton sample.
pub const MAX_LATTICE_DIM: usize = 4;
pub const HALTON_PROBES: usize = 10_000;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Probe states for a `dim`-dimensional input space.
pub fn probe_states(dim: usize) -> Vec<Vec<f64>> {
    if dim <= MAX_LATTICE_DIM {
        lattice(dim)
    } else {
        (1..=HALTON_PROBES).map(|i| halton_point(i, dim)).collect()
    }
}

fn lattice(dim: usize) -> Vec<Vec<f64>> {
    let step = 1.0 / (LATTICE_POINTS - 1) as f64;
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..LATTICE_POINTS).map(move |k| {
                    let mut q = p.clone();
                    q.push(k as f64 * step);
                    q
                })
            })
            .collect();
    }
    out
}

/// Radical inverse of `index` in base `base`.
pub fn radical_inverse(mut index: usize, base: u32) -> f64 {
    let b = base as usize;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * inv;
        index /= b;
        inv /= base as f64;
    }
    out
}

pub fn halton_point(index: usize, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton sample limited to {} dimensions", PRIMES.len());
    PRIMES[..dim].iter().map(|&b| radical_inverse(index, b)).collect()
}

/// Decoded action at each probe, `None` where the network does not match.
/// Membranes are reset before every probe; the genome itself is untouched.
pub fn behaviour(genome: &Genome, probes: &[Vec<f64>], decoder: &ActionDecoder) -> Result<Vec<Option<usize>>> {
    let mut g = genome.clone();
    probes
        .iter()
        .map(|s| {
            g.reset_membranes();
            let d = g.evaluate(s)?;
            Ok(d.matches.then(|| decoder.decode(d.action_bits)))
        })
        .collect()
}

/// True when the parent matches wherever the child does, with the same
/// action there, and matches at least as many probes.
pub fn behaviour_subsumes(parent: &[Option<usize>], child: &[Option<usize>]) -> bool {
    let mut parent_count = 0usize;
    let mut child_count = 0usize;
    for (p, c) in parent.iter().zip(child) {
        parent_count += p.is_some() as usize;
        if let Some(a) = c {
            child_count += 1;
            if *p != Some(*a) {
                return false;
            }
        }
    }
    parent_count >= child_count
}

/// Experience and accuracy requirements on a subsumer.
pub fn could_subsume(parent: &Classifier, params: &EngineParams) -> bool {
    parent.experience > params.theta_sub && parent.error < params.epsilon0
}

pub fn try_ga_subsumption(
    parent: &Classifier,
    child: &Genome,
    probes: &[Vec<f64>],
    decoder: &ActionDecoder,
    params: &EngineParams,
) -> Result<bool> {
    if !could_subsume(parent, params) {
        return Ok(false);
    }
    let p = behaviour(&parent.genome, probes, decoder)?;
    let c = behaviour(child, probes, decoder)?;
    Ok(behaviour_subsumes(&p, &c))
}
