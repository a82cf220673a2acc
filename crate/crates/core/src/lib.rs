//! NEAT neuroevolution with graph-modularity instrumentation.
//!
//! * [`modularity`]: Newman–Girvan Q-score, a greedy agglomerative maximizer
//!   and an exhaustive oracle for small graphs.
//! * [`neat`]: genomes with innovation numbers, mutation, crossover,
//!   speciation and generational reproduction.
//! * [`phenotype`]: feedforward and recurrent networks built from genomes.
//! * [`env`]: the acrobot swing-up and a simplified lunar lander, with
//!   episode execution and per-actuator usage totals.
//! * [`objectives`]: torque-usage deviation and modularity-rewarded fitness.
//! * [`map_elites`]: a 20×20 archive over (modularity, deviation).
//!
//! The crate is `no_std` and only needs `alloc`. All randomness flows from
//! explicit seeds, so results are reproducible bit for bit.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod env;
pub mod map_elites;
pub mod modularity;
pub mod neat;
pub mod objectives;
pub mod phenotype;
pub mod seed;
