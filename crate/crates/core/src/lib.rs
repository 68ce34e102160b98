//! A learning classifier system whose classifiers are evolved spiking
//! networks, with temporally extended actions and a perceptron baseline.

pub mod classifier;
pub mod engine;
pub mod env;
pub mod error;
pub mod evolution;
pub mod genome;
pub mod harness;
pub mod mlp;
pub mod rng;
pub mod spiking;

pub use classifier::{Classifier, ClassifierId, InitialParams, SelfAdaptiveRates};
pub use engine::{Engine, EngineParams, Phase, Population};
pub use env::{EnvKind, Environment};
pub use error::{Error, Result};
pub use genome::{Decision, Genome, Level, NetworkSpec, Representation};
pub use rng::Streams;
