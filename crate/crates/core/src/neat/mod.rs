//! NEAT: genomes with historical markings, structural mutation, speciation and
//! generational reproduction.

mod config;
mod genome;
mod innovation;
mod population;
mod species;
mod variation;

pub use config::{CompatibilityCoefficients, NeatConfig};
pub use genome::{Activation, ConnectionGene, Genome, GenomeError, NodeGene, NodeKind};
pub use innovation::InnovationRegistry;
pub use population::{reproduce, Population};
pub use species::{speciate, Species};
pub use variation::{compatibility_distance, crossover};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeatError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("genome at index {0} has no fitness assigned")]
    UnsetFitness(usize),
    #[error("population extinction: every species was culled")]
    Extinction,
    #[error(transparent)]
    Genome(#[from] GenomeError),
}
