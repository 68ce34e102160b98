//! Named random streams derived from one master seed.
//!
//! Every source of randomness in an experiment draws from its own stream so
//! that, for example, running stability probes never shifts the numbers seen
//! by the genetic algorithm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Generator type used for every stream.
pub type StreamRng = ChaCha8Rng;

/// Derive a stream generator from the master seed and a stream label.
pub fn derive_stream(master_seed: u64, label: &str) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// The independent random streams used by one experiment repeat.
#[derive(Clone, Debug)]
pub struct Streams {
    /// Covering (random network generation).
    pub cover: StreamRng,
    /// Parent selection, mutation and deletion.
    pub ga: StreamRng,
    /// Start positions and sensor noise.
    pub env: StreamRng,
    /// Explore roulette and drop-decision roulette.
    pub select: StreamRng,
    /// Everything consumed by stability probes.
    pub probe: StreamRng,
}

impl Streams {
    pub const LABELS: [&'static str; 5] = ["cover", "ga", "env", "select", "probe"];

    pub fn new(master_seed: u64) -> Self {
        Streams {
            cover: derive_stream(master_seed, "cover"),
            ga: derive_stream(master_seed, "ga"),
            env: derive_stream(master_seed, "env"),
            select: derive_stream(master_seed, "select"),
            probe: derive_stream(master_seed, "probe"),
        }
    }

    fn get(&self, label: &str) -> Option<&StreamRng> {
        match label {
            "cover" => Some(&self.cover),
            "ga" => Some(&self.ga),
            "env" => Some(&self.env),
            "select" => Some(&self.select),
            "probe" => Some(&self.probe),
            _ => None,
        }
    }

    fn get_mut(&mut self, label: &str) -> Option<&mut StreamRng> {
        match label {
            "cover" => Some(&mut self.cover),
            "ga" => Some(&mut self.ga),
            "env" => Some(&mut self.env),
            "select" => Some(&mut self.select),
            "probe" => Some(&mut self.probe),
            _ => None,
        }
    }

    /// Encode one stream's exact position as `seedhex:stream:wordpos`.
    pub fn encode(&self, label: &str) -> Option<String> {
        self.get(label).map(encode_rng)
    }

    /// Restore one stream from the output of [`Streams::encode`].
    pub fn restore(&mut self, label: &str, encoded: &str) -> Result<()> {
        let rng = decode_rng(encoded)?;
        let slot = self.get_mut(label).ok_or_else(|| Error::config(format!("unknown rng stream `{label}`")))?;
        *slot = rng;
        Ok(())
    }
}

fn encode_rng(rng: &StreamRng) -> String {
    let seed: String = rng.get_seed().iter().map(|b| format!("{b:02x}")).collect();
    format!("{seed}:{}:{}", rng.get_stream(), rng.get_word_pos())
}

fn decode_rng(encoded: &str) -> Result<StreamRng> {
    let bad = || Error::config(format!("malformed rng state `{encoded}`"));
    let mut parts = encoded.split(':');
    let seed_hex = parts.next().ok_or_else(bad)?;
    let stream: u64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let word_pos: u128 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if seed_hex.len() != 64 || parts.next().is_some() {
        return Err(bad());
    }
    let mut seed = [0u8; 32];
    for (i, byte) in seed.iter_mut().enumerate() {
        *byte = u8::from_str_radix(&seed_hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(word_pos);
    Ok(rng)
}
