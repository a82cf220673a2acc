use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::genome::chance;
use super::variation::crossover_with_rate;
use super::{speciate, Genome, InnovationRegistry, NeatConfig, NeatError, Species};

fn fitness_of(population: &[Genome], i: usize) -> Result<f64, NeatError> {
    population[i].fitness.ok_or(NeatError::UnsetFitness(i))
}

/// Highest-fitness index, first one on ties. Genomes without fitness are skipped.
fn best_index(population: &[Genome]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, g) in population.iter().enumerate() {
        if let Some(f) = g.fitness {
            if best.is_none_or(|(_, b)| f > b) {
                best = Some((i, f));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Largest-remainder apportionment of `total` seats by `shares`.
fn apportion(shares: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = shares.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 && sum.is_finite() {
        shares.iter().map(|s| s / sum).collect()
    } else {
        vec![1.0 / shares.len() as f64; shares.len()]
    };
    let exact: Vec<f64> = shares.iter().map(|s| s * total as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| libm::floor(*e) as usize).collect();
    let mut assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - quotas[a] as f64, exact[b] - quotas[b] as f64);
        rb.partial_cmp(&ra).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if assigned >= total {
            break;
        }
        quotas[i] += 1;
        assigned += 1;
    }
    while assigned > total {
        let i = (0..quotas.len()).max_by_key(|&i| (quotas[i], usize::MAX - i)).unwrap();
        quotas[i] -= 1;
        assigned -= 1;
    }
    quotas
}

/// Produces the next generation from an evaluated, speciated population.
///
/// Species stagnant for `stagnation_limit` generations are removed unless they
/// hold the population champion. Offspring quotas follow shared fitness
/// (fitness shifted by the population minimum, divided by species size).
/// With elitism, the champion of every species larger than
/// `elitism_min_species_size`, and the population champion, are copied
/// unchanged with their fitness. Other offspring come from crossover of two
/// parents from the top `survival_threshold` fraction (probability
/// `crossover_rate`) or a copy of one, and are always mutated.
pub fn reproduce<R: Rng + ?Sized>(
    species: &mut Vec<Species>,
    population: &[Genome],
    config: &NeatConfig,
    registry: &mut InnovationRegistry,
    rng: &mut R,
) -> Result<Vec<Genome>, NeatError> {
    for i in 0..population.len() {
        fitness_of(population, i)?;
    }
    let champion = best_index(population).ok_or(NeatError::Extinction)?;

    for s in species.iter_mut() {
        let best = s
            .members
            .iter()
            .map(|&m| population[m].fitness.unwrap_or(f64::NEG_INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        let improved = s.best_ever().is_none_or(|prev| best > prev);
        s.best_fitness_history.push(best);
        s.stagnation_counter = if improved { 0 } else { s.stagnation_counter + 1 };
    }
    species.retain(|s| {
        !s.members.is_empty()
            && (s.stagnation_counter < config.stagnation_limit || s.members.contains(&champion))
    });
    if species.is_empty() {
        return Err(NeatError::Extinction);
    }

    let floor = species
        .iter()
        .flat_map(|s| s.members.iter())
        .map(|&m| population[m].fitness.unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    let shares: Vec<f64> = species
        .iter()
        .map(|s| {
            let size = s.members.len() as f64;
            s.members
                .iter()
                .map(|&m| (population[m].fitness.unwrap_or(floor) - floor) / size)
                .sum()
        })
        .collect();
    let mut quotas = apportion(&shares, config.population_size);
    let champion_species = species.iter().position(|s| s.members.contains(&champion));
    if let (true, Some(cs)) = (config.elitism, champion_species) {
        if quotas[cs] == 0 {
            let donor = (0..quotas.len())
                .max_by_key(|&i| (quotas[i], usize::MAX - i))
                .unwrap();
            quotas[donor] -= 1;
            quotas[cs] += 1;
        }
    }

    let mut next = Vec::with_capacity(config.population_size);
    for (s, &quota) in species.iter().zip(&quotas) {
        if quota == 0 {
            continue;
        }
        let mut ranked = s.members.clone();
        ranked.sort_by(|&a, &b| {
            let (fa, fb) = (population[a].fitness, population[b].fitness);
            fb.partial_cmp(&fa).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        let mut remaining = quota;
        let keeps_champion = s.members.len() > config.elitism_min_species_size
            || s.members.contains(&champion);
        if config.elitism && keeps_champion {
            next.push(population[ranked[0]].clone());
            remaining -= 1;
        }
        let cut = libm::ceil(config.survival_threshold * ranked.len() as f64) as usize;
        let pool = &ranked[..cut.max(2).min(ranked.len())];
        for _ in 0..remaining {
            let mut child = if pool.len() >= 2 && chance(rng, config.crossover_rate) {
                let i = rng.gen_range(0..pool.len());
                let mut j = rng.gen_range(0..pool.len() - 1);
                if j >= i {
                    j += 1;
                }
                let mut c = crossover_with_rate(
                    &population[pool[i]],
                    &population[pool[j]],
                    config.disabled_gene_rate,
                    rng,
                )?;
                if config.feed_forward {
                    c.break_cycles();
                }
                c
            } else {
                population[pool[rng.gen_range(0..pool.len())]].clone()
            };
            child.mutate(config, registry, rng);
            child.fitness = None;
            child.reward = None;
            next.push(child);
        }
    }
    debug_assert_eq!(next.len(), config.population_size);
    Ok(next)
}

/// A speciated NEAT population driven one generation at a time.
///
/// The caller assigns fitness to every genome listed by [`Population::pending`]
/// and then calls [`Population::advance`]. Elites carried over unchanged keep
/// their fitness and are not pending.
#[derive(Debug, Clone)]
pub struct Population {
    config: NeatConfig,
    pub genomes: Vec<Genome>,
    pub species: Vec<Species>,
    pub registry: InnovationRegistry,
    rng: ChaCha8Rng,
    generation: usize,
    next_species_id: u32,
}

impl Population {
    /// Fully connected input→output genomes with uniform `[-1, 1]` weights.
    pub fn new(config: NeatConfig, seed: u64) -> Result<Self, NeatError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut registry = InnovationRegistry::new((config.inputs + config.outputs) as u32);
        let genomes: Vec<Genome> = (0..config.population_size)
            .map(|_| Genome::fully_connected(&config, &mut registry, &mut rng))
            .collect();
        let mut next_species_id = 0;
        let species = speciate(
            &genomes,
            Vec::new(),
            config.compatibility_threshold,
            &config.coefficients,
            &mut next_species_id,
            &mut rng,
        );
        Ok(Self {
            config,
            genomes,
            species,
            registry,
            rng,
            generation: 0,
            next_species_id,
        })
    }

    pub fn config(&self) -> &NeatConfig {
        &self.config
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Indices of genomes still awaiting a fitness value.
    pub fn pending(&self) -> Vec<usize> {
        (0..self.genomes.len())
            .filter(|&i| self.genomes[i].fitness.is_none())
            .collect()
    }

    pub fn set_fitness(&mut self, index: usize, fitness: f64, reward: f64) {
        self.genomes[index].fitness = Some(fitness);
        self.genomes[index].reward = Some(reward);
    }

    /// Highest-fitness genome (first on ties).
    pub fn champion(&self) -> Option<&Genome> {
        best_index(&self.genomes).map(|i| &self.genomes[i])
    }

    /// Reproduces and re-speciates; every genome must have fitness.
    pub fn advance(&mut self) -> Result<(), NeatError> {
        let mut species = core::mem::take(&mut self.species);
        let next = reproduce(
            &mut species,
            &self.genomes,
            &self.config,
            &mut self.registry,
            &mut self.rng,
        )?;
        self.species = speciate(
            &next,
            species,
            self.config.compatibility_threshold,
            &self.config.coefficients,
            &mut self.next_species_id,
            &mut self.rng,
        );
        self.genomes = next;
        self.generation += 1;
        Ok(())
    }
}
