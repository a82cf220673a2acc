//! MAP-Elites over (modularity, torque deviation) with NEAT variation.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{EnvError, EvalResult};
use crate::modularity::{approx_max_q, genome_to_graph};
use crate::neat::{Genome, InnovationRegistry, NeatConfig, NeatError};
use crate::objectives::{torque_deviation, ObjectiveError};
use crate::seed::derive_seed;

/// Cells per descriptor axis.
pub const GRID_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapElitesError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("evaluator returned {got} results for {expected} genomes")]
    BatchSize { expected: usize, got: usize },
    #[error(transparent)]
    Neat(#[from] NeatError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

/// Highest-modularity partition score clamped into `[0, 1]`; genomes without
/// enabled edges score 0.
pub fn modularity_descriptor(genome: &Genome) -> f64 {
    approx_max_q(&genome_to_graph(genome)).map_or(0.0, |r| r.q.clamp(0.0, 1.0))
}

/// `(q, d)` descriptor pair of an evaluated genome.
pub fn descriptors(genome: &Genome, eval: &EvalResult) -> Result<(f64, f64), ObjectiveError> {
    Ok((
        modularity_descriptor(genome),
        torque_deviation(&eval.mean_abs_actuation)?,
    ))
}

/// Cell of a descriptor value in `[0, 1]`; 1.0 falls in the last cell.
pub fn cell_index(value: f64) -> usize {
    let v = if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) };
    (libm::floor(v * GRID_SIZE as f64) as usize).min(GRID_SIZE - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub genome: Genome,
    pub fitness: f64,
    pub q: f64,
    pub d: f64,
    /// Evaluation seed that produced `fitness` and `d`.
    pub eval_seed: u64,
}

/// `GRID_SIZE × GRID_SIZE` archive indexed by `(q_cell, d_cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveGrid {
    cells: Vec<Option<Elite>>,
}

impl Default for ArchiveGrid {
    fn default() -> Self {
        Self::new()
    }
}

impl ArchiveGrid {
    pub fn new() -> Self {
        Self {
            cells: vec![None; GRID_SIZE * GRID_SIZE],
        }
    }

    pub fn cell(&self, q_cell: usize, d_cell: usize) -> Option<&Elite> {
        self.cells[q_cell * GRID_SIZE + d_cell].as_ref()
    }

    /// Stores the candidate if its cell is empty or it is strictly fitter.
    pub fn insert(&mut self, genome: Genome, fitness: f64, (q, d): (f64, f64), eval_seed: u64) -> bool {
        debug_assert!((0.0..=1.0).contains(&q) && (0.0..=1.0).contains(&d));
        let slot = &mut self.cells[cell_index(q) * GRID_SIZE + cell_index(d)];
        if slot.as_ref().is_some_and(|e| !(fitness > e.fitness)) {
            return false;
        }
        let mut genome = genome;
        genome.fitness = Some(fitness);
        *slot = Some(Elite {
            genome,
            fitness,
            q,
            d,
            eval_seed,
        });
        true
    }

    pub fn coverage(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Occupied cells as `(q_cell, d_cell, elite)` in row-major order.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize, &Elite)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|e| (i / GRID_SIZE, i % GRID_SIZE, e)))
    }

    /// Fittest elite, first in row-major order on ties.
    pub fn best(&self) -> Option<&Elite> {
        self.occupied()
            .map(|(_, _, e)| e)
            .fold(None, |best: Option<&Elite>, e| match best {
                Some(b) if b.fitness >= e.fitness => Some(b),
                _ => Some(e),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapElitesConfig {
    pub neat: NeatConfig,
    pub initial_population: usize,
    pub batch_size: usize,
    pub generations: usize,
    pub mutation_probability: f64,
    pub crossover_probability: f64,
    /// Mutate a child that drew neither operator; when off, such children
    /// are skipped instead of evaluated.
    pub force_operator: bool,
}

impl MapElitesConfig {
    /// 100 initial genomes, batches of 12, mutation 0.75, crossover 0.3,
    /// 2000 generations.
    pub fn new(neat: NeatConfig) -> Self {
        Self {
            neat,
            initial_population: 100,
            batch_size: 12,
            generations: 2000,
            mutation_probability: 0.75,
            crossover_probability: 0.3,
            force_operator: true,
        }
    }

    pub fn validate(&self) -> Result<(), MapElitesError> {
        if self.initial_population == 0 || self.batch_size == 0 {
            return Err(MapElitesError::InvalidConfig(
                "initial_population and batch_size must be positive",
            ));
        }
        let probs = [self.mutation_probability, self.crossover_probability];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(MapElitesError::InvalidConfig("probabilities must lie in [0, 1]"));
        }
        if self.neat.inputs == 0 || self.neat.outputs == 0 {
            return Err(MapElitesError::InvalidConfig("inputs and outputs must be nonzero"));
        }
        Ok(())
    }
}

/// A genome awaiting evaluation with its pre-assigned seed.
#[derive(Debug, Clone, Copy)]
pub struct Job<'a> {
    pub genome: &'a Genome,
    pub eval_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    /// 0 is the seeded archive before any offspring.
    pub generation: usize,
    pub coverage: usize,
    pub best_fitness: f64,
    pub accepted: usize,
}

#[derive(Debug, Clone)]
pub struct MapElitesRun {
    pub archive: ArchiveGrid,
    pub history: Vec<GenerationStats>,
    pub registry: InnovationRegistry,
}

pub fn init_eval_seed(run_seed: u64, index: usize) -> u64 {
    derive_seed(run_seed, &[0, index as u64])
}

pub fn child_eval_seed(run_seed: u64, generation: usize, child: usize) -> u64 {
    derive_seed(run_seed, &[1, generation as u64, child as u64])
}

fn evaluate_into<F>(
    archive: &mut ArchiveGrid,
    batch: Vec<(Genome, u64)>,
    evaluate: &mut F,
) -> Result<usize, MapElitesError>
where
    F: FnMut(&[Job<'_>]) -> Result<Vec<EvalResult>, EnvError>,
{
    let jobs: Vec<Job<'_>> = batch
        .iter()
        .map(|(genome, eval_seed)| Job {
            genome,
            eval_seed: *eval_seed,
        })
        .collect();
    let results = evaluate(&jobs)?;
    if results.len() != batch.len() {
        return Err(MapElitesError::BatchSize {
            expected: batch.len(),
            got: results.len(),
        });
    }
    let mut accepted = 0;
    for ((genome, seed), eval) in batch.into_iter().zip(results) {
        let desc = descriptors(&genome, &eval)?;
        if archive.insert(genome, eval.mean_reward, desc, seed) {
            accepted += 1;
        }
    }
    Ok(accepted)
}

fn record(archive: &ArchiveGrid, generation: usize, accepted: usize) -> GenerationStats {
    GenerationStats {
        generation,
        coverage: archive.coverage(),
        best_fitness: archive.best().map_or(f64::NEG_INFINITY, |e| e.fitness),
        accepted,
    }
}

/// Runs MAP-Elites. `evaluate` receives each batch (the initial genomes, then
/// every generation's offspring) and must return one result per job, in
/// order; it may evaluate the batch in parallel. Variation happens on one
/// seeded stream and evaluation seeds are fixed per `(generation, child)`,
/// so the outcome does not depend on how `evaluate` schedules work.
pub fn map_elites_run<F>(config: &MapElitesConfig, run_seed: u64, mut evaluate: F) -> Result<MapElitesRun, MapElitesError>
where
    F: FnMut(&[Job<'_>]) -> Result<Vec<EvalResult>, EnvError>,
{
    config.validate()?;
    let neat = &config.neat;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, &[2]));
    let mut registry = InnovationRegistry::new((neat.inputs + neat.outputs) as u32);
    let mut archive = ArchiveGrid::new();

    let initial: Vec<(Genome, u64)> = (0..config.initial_population)
        .map(|i| {
            (
                Genome::fully_connected(neat, &mut registry, &mut rng),
                init_eval_seed(run_seed, i),
            )
        })
        .collect();
    let accepted = evaluate_into(&mut archive, initial, &mut evaluate)?;
    let mut history = vec![record(&archive, 0, accepted)];

    for generation in 1..=config.generations {
        let elites: Vec<&Elite> = archive.occupied().map(|(_, _, e)| e).collect();
        let mut batch = Vec::with_capacity(config.batch_size);
        for child_index in 0..config.batch_size {
            let parent = elites[rng.gen_range(0..elites.len())];
            let crossed = rng.gen_bool(config.crossover_probability);
            let mut mutated = rng.gen_bool(config.mutation_probability);
            if !crossed && !mutated {
                if !config.force_operator {
                    continue;
                }
                mutated = true;
            }
            let mut child = if crossed {
                let mate = elites[rng.gen_range(0..elites.len())];
                let mut c = crate::neat::crossover(&parent.genome, &mate.genome, &mut rng)?;
                if neat.feed_forward {
                    c.break_cycles();
                }
                c
            } else {
                parent.genome.clone()
            };
            if mutated {
                child.mutate(neat, &mut registry, &mut rng);
            }
            child.fitness = None;
            child.reward = None;
            batch.push((child, child_eval_seed(run_seed, generation, child_index)));
        }
        let accepted = if batch.is_empty() {
            0
        } else {
            evaluate_into(&mut archive, batch, &mut evaluate)?
        };
        history.push(record(&archive, generation, accepted));
    }

    Ok(MapElitesRun {
        archive,
        history,
        registry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neat::{ConnectionGene, NodeGene, NodeKind};

    fn tiny() -> Genome {
        Genome::new(
            vec![
                NodeGene::new(0, NodeKind::Input, 0.0),
                NodeGene::new(1, NodeKind::Output, 0.0),
            ],
            vec![ConnectionGene {
                innovation: 0,
                from: 0,
                to: 1,
                weight: 1.0,
                enabled: true,
            }],
        )
    }

    #[test]
    fn cell_boundaries() {
        assert_eq!(cell_index(0.0), 0);
        assert_eq!(cell_index(0.049), 0);
        assert_eq!(cell_index(0.05), 1);
        assert_eq!(cell_index(0.999), 19);
        assert_eq!(cell_index(1.0), 19);
    }

    #[test]
    fn insert_requires_strict_improvement() {
        let mut a = ArchiveGrid::new();
        assert!(a.insert(tiny(), 1.0, (0.3, 0.7), 0));
        assert!(!a.insert(tiny(), 1.0, (0.31, 0.71), 1));
        assert!(!a.insert(tiny(), 0.5, (0.31, 0.71), 1));
        assert!(a.insert(tiny(), 1.5, (0.31, 0.71), 2));
        assert_eq!(a.coverage(), 1);
        let e = a.cell(6, 14).unwrap();
        assert_eq!((e.fitness, e.eval_seed), (1.5, 2));
        assert!(a.insert(tiny(), -3.0, (1.0, 1.0), 3));
        assert!(a.cell(19, 19).is_some());
        assert_eq!(a.best().unwrap().fitness, 1.5);
    }

    #[test]
    fn single_connection_genome_has_zero_q() {
        assert_eq!(modularity_descriptor(&tiny()), 0.0);
        let mut g = tiny();
        g.connections[0].enabled = false;
        assert_eq!(modularity_descriptor(&g), 0.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = MapElitesConfig::new(NeatConfig::new(2, 2, 2, true));
        cfg.validate().unwrap();
        cfg.crossover_probability = 1.5;
        assert!(cfg.validate().is_err());
    }
}
